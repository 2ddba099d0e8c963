from polystab.config.getters import get_runtime_settings, get_solver_settings


__all__ = (
    'get_runtime_settings',
    'get_solver_settings',
)

from . import models



def get_solver_settings(**overrides) -> models.Solver:
    return models.Solver(**overrides)


def get_runtime_settings() -> models.Runtime:
    return models.Runtime()

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict



class Solver(BaseSettings):
    model_config = SettingsConfigDict(env_prefix='polystab_solver_')

    name: str = 'CLARABEL'
    time_limit: float = Field(default=600.0, gt=0)
    max_iters: int = Field(default=500, gt=0)
    feas_tol: float = 1e-8
    psd_tol: float = 1e-8
    margin_cap: float = Field(default=1e-3, gt=0)
    verbose: bool = False


class Runtime(BaseSettings):
    model_config = SettingsConfigDict(env_prefix='polystab_')

    log_level: str = 'INFO'
    workers: int = Field(default=4, gt=0)
    seed: int = 0

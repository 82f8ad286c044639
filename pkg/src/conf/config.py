from pydantic import BaseSettings


class Settings(BaseSettings):
    sqlalchemy_database_url: str = 'sqlite:///./spde_lab.db'
    sqlalchemy_echo: bool = False
    log_level: str = 'INFO'
    default_seed: int = 20240101
    table_offset: str = '1/100'
    blowup_bound: float = 1e6
    cbar_safety: float = 2.0
    m_constant: float = 1.0
    tail_tol: float = 1e-10
    trace_max_terms: int = 4_000_000
    holder_pairs: int = 2000
    out_dir: str = 'results'
    api_max_work: int = 2_000_000

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"


settings = Settings()

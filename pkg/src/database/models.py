import enum

from sqlalchemy import BigInteger, Column, Integer, JSON, String, DateTime, func, Enum
from sqlalchemy.orm import declarative_base

Base = declarative_base()


class RunKind(enum.Enum):
    regime_check: str = 'regime_check'
    rho_interval: str = 'rho_interval'
    regime_table: str = 'regime_table'
    simulate: str = 'simulate'
    couple: str = 'couple'
    galerkin: str = 'galerkin'
    kolmogorov: str = 'kolmogorov'
    monitor: str = 'monitor'
    demo: str = 'demo'
    continuous_dependence: str = 'continuous_dependence'


class Run(Base):
    __tablename__ = "runs"
    id = Column(Integer, primary_key=True, index=True)
    kind = Column('kind', Enum(RunKind), nullable=False, index=True)
    seed = Column(BigInteger, nullable=True)
    config = Column(JSON, nullable=False)
    verdict = Column(JSON, nullable=True)
    checksum = Column(String(64), nullable=True)
    summary = Column(JSON, nullable=False)
    created_at = Column(DateTime, default=func.now())

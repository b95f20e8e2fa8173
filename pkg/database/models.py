from datetime import datetime

from sqlalchemy import Column, DateTime, Float, Integer, String, Text, UniqueConstraint
from sqlalchemy.orm import declarative_base

Base = declarative_base()


class QuantizedModeRecord(Base):
    """one solved separation constant, keyed by geometry, label and tolerance"""

    __tablename__ = "quantized_modes"
    __table_args__ = (UniqueConstraint("u", "n", "tol", name="uq_mode_u_n_tol"),)

    id = Column(Integer, primary_key=True)
    u = Column(Float, nullable=False, index=True)
    n = Column(Integer, nullable=False)
    tol = Column(Float, nullable=False)

    alpha_over_k = Column(Float, nullable=False)
    norm = Column(Float, nullable=False)
    residual = Column(Float, nullable=False)

    created_at = Column(DateTime, default=datetime.utcnow)

    def __repr__(self):
        return f"<QuantizedModeRecord(u={self.u}, n={self.n}, alpha/k={self.alpha_over_k})>"


class ModeTableRecord(Base):
    """marks that every mode n_first..n_last inside |alpha/k| <= alpha_cut, capped at n_max, is cached"""

    __tablename__ = "mode_tables"
    __table_args__ = (UniqueConstraint("u", "tol", "alpha_cut", "n_max", name="uq_table_u_tol_cut_nmax"),)

    id = Column(Integer, primary_key=True)
    u = Column(Float, nullable=False, index=True)
    tol = Column(Float, nullable=False)
    alpha_cut = Column(Float, nullable=False)
    n_max = Column(Integer, nullable=False)
    n_first = Column(Integer, nullable=False)  # n_last < n_first for an empty table
    n_last = Column(Integer, nullable=False)

    created_at = Column(DateTime, default=datetime.utcnow)


class RunRecord(Base):
    """cli invocation log"""

    __tablename__ = "runs"

    id = Column(Integer, primary_key=True)
    command = Column(String(20), nullable=False)
    config = Column(Text, nullable=False)  # canonical json
    status = Column(String(20), nullable=False)
    rows = Column(Integer, default=0)
    error = Column(Text, nullable=True)

    created_at = Column(DateTime, default=datetime.utcnow)
    finished_at = Column(DateTime, nullable=True)

    def __repr__(self):
        return f"<RunRecord(command={self.command}, status={self.status})>"

import json
import logging
import math
from datetime import datetime

from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from config.settings import DATABASE_URL
from database.models import Base, ModeTableRecord, QuantizedModeRecord, RunRecord
from modes.params import CavityParams
from modes.quantization import QuantizedMode, eikonal_linear, mode_table, quantize

logger = logging.getLogger(__name__)

# create database engine
engine = create_engine(DATABASE_URL, echo=False)
SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)


def init_database(bind=None):
    """create all cache and run-log tables"""
    Base.metadata.create_all(bind=bind or engine)
    logger.info("database initialized")


def _to_mode(params: CavityParams, record: QuantizedModeRecord) -> QuantizedMode:
    return QuantizedMode(
        n=record.n,
        alpha_over_k=record.alpha_over_k,
        norm=record.norm,
        residual=record.residual,
        eikonal_n=eikonal_linear(params, math.pi * record.alpha_over_k),
    )


def get_cached_mode(params: CavityParams, n: int, session_factory=None) -> QuantizedMode | None:
    db = (session_factory or SessionLocal)()
    try:
        record = (
            db.query(QuantizedModeRecord)
            .filter(
                QuantizedModeRecord.u == params.u,
                QuantizedModeRecord.n == n,
                QuantizedModeRecord.tol == params.tol,
            )
            .first()
        )
        return _to_mode(params, record) if record else None
    finally:
        db.close()


def _add_mode(db, params: CavityParams, mode: QuantizedMode):
    exists = (
        db.query(QuantizedModeRecord.id)
        .filter(
            QuantizedModeRecord.u == params.u,
            QuantizedModeRecord.n == mode.n,
            QuantizedModeRecord.tol == params.tol,
        )
        .first()
    )
    if not exists:
        db.add(
            QuantizedModeRecord(
                u=params.u,
                n=mode.n,
                tol=params.tol,
                alpha_over_k=mode.alpha_over_k,
                norm=mode.norm,
                residual=mode.residual,
            )
        )


def store_mode(params: CavityParams, mode: QuantizedMode, session_factory=None):
    """store a solved mode; an existing record for (u, n, tol) is kept"""
    db = (session_factory or SessionLocal)()
    try:
        _add_mode(db, params, mode)
        db.commit()
    finally:
        db.close()


def cached_quantize(params: CavityParams, n: int, session_factory=None) -> QuantizedMode:
    """quantize() through the cache"""
    mode = get_cached_mode(params, n, session_factory)
    if mode is not None:
        logger.debug(f"mode cache hit u={params.u}, n={n}")
        return mode
    mode = quantize(params, n)
    store_mode(params, mode, session_factory)
    return mode


def cached_mode_table(params: CavityParams, alpha_cut: float, session_factory=None) -> list[QuantizedMode]:
    """mode_table() through the cache; a table is reused only for the same (u, tol, cut, n_max)"""
    db = (session_factory or SessionLocal)()
    try:
        table = (
            db.query(ModeTableRecord)
            .filter(
                ModeTableRecord.u == params.u,
                ModeTableRecord.tol == params.tol,
                ModeTableRecord.alpha_cut == alpha_cut,
                ModeTableRecord.n_max == params.n_max,
            )
            .first()
        )
        if table:
            records = (
                db.query(QuantizedModeRecord)
                .filter(
                    QuantizedModeRecord.u == params.u,
                    QuantizedModeRecord.tol == params.tol,
                    QuantizedModeRecord.n >= table.n_first,
                    QuantizedModeRecord.n <= table.n_last,
                )
                .order_by(QuantizedModeRecord.n)
                .all()
            )
            if len(records) == table.n_last - table.n_first + 1:
                logger.debug(f"mode table cache hit u={params.u}: {len(records)} modes")
                return [_to_mode(params, r) for r in records]
            logger.warning(f"mode table cache for u={params.u} is incomplete, recomputing")

        modes = mode_table(params, alpha_cut)
        for mode in modes:
            _add_mode(db, params, mode)
        if not table:
            db.add(
                ModeTableRecord(
                    u=params.u,
                    tol=params.tol,
                    alpha_cut=alpha_cut,
                    n_max=params.n_max,
                    n_first=modes[0].n if modes else 0,
                    n_last=modes[-1].n if modes else -1,
                )
            )
        db.commit()
        return modes
    finally:
        db.close()


def record_run(
    command: str,
    config: dict,
    status: str,
    rows: int = 0,
    error: str | None = None,
    session_factory=None,
) -> int:
    """log a finished cli run and return its id"""
    db = (session_factory or SessionLocal)()
    try:
        run = RunRecord(
            command=command,
            config=json.dumps(config, sort_keys=True),
            status=status,
            rows=rows,
            error=error,
            finished_at=datetime.utcnow(),
        )
        db.add(run)
        db.commit()
        db.refresh(run)
        logger.info(f"recorded {command} run {run.id}: {status}")
        return run.id
    finally:
        db.close()

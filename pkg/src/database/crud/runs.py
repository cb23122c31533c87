from sqlalchemy import select

from src.database.database import SessionLocal
from src.database.models import RunsOrm
from src.logs import getLogger
from src.utils.utils import config_hash

logger = getLogger(__name__)


def add_run(estimate, cfg, result_path: str | None = None) -> RunsOrm:
    """Запись прогона estimate-rate в реестр"""
    with SessionLocal() as session:
        with session.begin():
            run = RunsOrm(
                scenario=cfg.scenario.value,
                hurst=cfg.hurst,
                r_norm=cfg.r_norm,
                replicates=cfg.replicates,
                seed=cfg.seed,
                slope=estimate.slope,
                slope_stderr=estimate.slope_stderr,
                theoretical_exponent=estimate.theoretical_exponent,
                passed=estimate.passed,
                config_hash=config_hash(cfg.model_dump(mode="json")),
                result_path=result_path,
            )
            session.add(run)
            session.flush()
            logger.debug(f"Registered run: {run}")
            return run


def get_runs(scenario: str | None = None, limit: int | None = None) -> list[RunsOrm]:
    """Прогоны от новых к старым"""
    with SessionLocal() as session:
        stmt = select(RunsOrm).order_by(RunsOrm.id.desc())
        if scenario:
            stmt = stmt.where(RunsOrm.scenario == scenario)
        if limit:
            stmt = stmt.limit(limit)
        return list(session.execute(stmt).scalars().all())


def get_run(run_id: int) -> RunsOrm | None:
    with SessionLocal() as session:
        return session.get(RunsOrm, run_id)

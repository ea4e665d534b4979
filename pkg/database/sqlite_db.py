"""SQLite run registry."""
from pathlib import Path
from typing import List, Optional, Union

import structlog
from sqlalchemy import create_engine
from sqlalchemy.orm import Session, sessionmaker

from config.settings import settings
from shared.utils import generate_id, get_timestamp

from .models import Base, RunDB

logger = structlog.get_logger()


class RunRegistry:
    """Records every command-line run outside the output trees."""

    def __init__(self, db_path: Optional[Union[str, Path]] = None):
        """
        Initialize the registry.

        Args:
            db_path: Path to SQLite database file
        """
        self.db_path = Path(db_path or settings.run_registry_path)
        self.db_path.parent.mkdir(parents=True, exist_ok=True)
        self.engine = create_engine(f"sqlite:///{self.db_path}", echo=False)
        Base.metadata.create_all(self.engine)
        self.SessionLocal = sessionmaker(bind=self.engine, expire_on_commit=False)
        logger.debug("run_registry_initialized", db_path=str(self.db_path))

    def get_session(self) -> Session:
        """Get a new database session."""
        return self.SessionLocal()

    def start_run(self, command: str, out_dir: Union[str, Path], seed: Optional[int] = None,
                  jobs: int = 1, tool_version: Optional[str] = None) -> str:
        """Insert a run in `running` state and return its id."""
        run_id = generate_id("RUN")
        with self.get_session() as session:
            session.add(RunDB(
                id=run_id,
                command=command,
                out_dir=str(out_dir),
                seed=seed,
                jobs=jobs,
                tool_version=tool_version,
                status="running",
                started_at=get_timestamp(),
            ))
            session.commit()
        logger.debug("run_started", run_id=run_id, command=command)
        return run_id

    def finish_run(self, run_id: str, status: str, manifest_digest: Optional[str] = None,
                   error: Optional[str] = None) -> Optional[RunDB]:
        """Close a run with its final status."""
        with self.get_session() as session:
            run = session.get(RunDB, run_id)
            if run is None:
                logger.warning("run_not_found", run_id=run_id)
                return None
            run.status = status
            run.manifest_digest = manifest_digest
            run.error = error
            run.finished_at = get_timestamp()
            session.commit()
            return run

    def get_run(self, run_id: str) -> Optional[RunDB]:
        with self.get_session() as session:
            return session.get(RunDB, run_id)

    def list_runs(self, command: Optional[str] = None, limit: int = 50) -> List[RunDB]:
        """Most recent runs first."""
        with self.get_session() as session:
            query = session.query(RunDB)
            if command:
                query = query.filter_by(command=command)
            return query.order_by(RunDB.started_at.desc(), RunDB.id.desc()).limit(limit).all()


_registry: Optional[RunRegistry] = None


def get_registry() -> RunRegistry:
    """Registry at the configured path, created on first use."""
    global _registry
    if _registry is None or _registry.db_path != Path(settings.run_registry_path):
        _registry = RunRegistry()
    return _registry

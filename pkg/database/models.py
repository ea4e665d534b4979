"""SQLAlchemy database models."""
from datetime import datetime

from sqlalchemy import Column, DateTime, Integer, String, Text
from sqlalchemy.orm import declarative_base

Base = declarative_base()


class RunDB(Base):
    """One command-line run."""
    __tablename__ = "runs"

    id = Column(String, primary_key=True)
    command = Column(String, nullable=False)
    out_dir = Column(String, nullable=False)
    seed = Column(Integer, nullable=True)
    jobs = Column(Integer, default=1)
    manifest_digest = Column(String, nullable=True)
    tool_version = Column(String, nullable=True)
    status = Column(String, default="running")
    error = Column(Text, nullable=True)
    started_at = Column(DateTime, default=datetime.now)
    finished_at = Column(DateTime, nullable=True)

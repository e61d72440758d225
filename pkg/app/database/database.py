from typing import Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import StaticPool
from app.core.config import settings
from app.database.models import Base


def make_engine(url: Optional[str] = None) -> Engine:
    """Engine for url, defaulting to settings.DATABASE_URL."""
    url = url or settings.DATABASE_URL
    if url in ("sqlite://", "sqlite:///:memory:"):
        # one shared connection so every session sees the same in-memory database
        return create_engine(url, connect_args={"check_same_thread": False}, poolclass=StaticPool)
    return create_engine(url)


def make_session_factory(url: Optional[str] = None) -> sessionmaker:
    return sessionmaker(autocommit=False, autoflush=False, bind=make_engine(url))


def create_tables(url: Optional[str] = None) -> Engine:
    """Create all tables in the database."""
    engine = make_engine(url)
    Base.metadata.create_all(bind=engine)
    return engine

"""
Results Store
Engine and sessions for the SQLite (or any SQLAlchemy URL) store of benchmark runs
"""

import logging
from contextlib import contextmanager

from sqlalchemy import create_engine
from sqlalchemy.orm import scoped_session, sessionmaker

from config import DATABASE_URL

logger = logging.getLogger(__name__)


def make_engine(url):
    # SQLite connections may be handed between threads by the scoped session
    connect_args = {'check_same_thread': False} if url.startswith('sqlite') else {}
    return create_engine(url, connect_args=connect_args, echo=False)


engine = make_engine(DATABASE_URL)

SessionLocal = scoped_session(sessionmaker(autocommit=False, autoflush=False, bind=engine))


def get_db():
    """Plain session for read-only scripts; the caller closes it"""
    return SessionLocal()


@contextmanager
def db_session():
    """
    Session that commits on success and rolls back on any exception

    Usage:
        with db_session() as db:
            db.add(ExperimentRun(command='query'))
    """
    db = SessionLocal()
    try:
        yield db
        db.commit()
    except Exception:
        db.rollback()
        raise
    finally:
        db.close()


def init_db(bind=None):
    """
    Create the run, record and build tables if missing

    alembic upgrade head is the route for existing stores; this covers fresh ones.
    """
    from models import Base
    bind = bind if bind is not None else engine
    Base.metadata.create_all(bind=bind)
    logger.info("Results store ready at %s", bind.url)
    return bind


if __name__ == '__main__':
    logging.basicConfig(level=logging.INFO)
    init_db()

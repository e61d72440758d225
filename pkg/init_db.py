#!/usr/bin/env python3
"""
Database initialization script.
Creates the cluster results tables in DATABASE_URL (or the URL given as argument).
"""

import logging
import sys

from app.core.config import settings
from app.core.logging_config import configure_logging
from app.database.database import create_tables
from app.database.models import Base

logger = logging.getLogger(__name__)


def main(url: str = None):
    """Initialize the database."""
    url = url or settings.DATABASE_URL
    try:
        logger.info(f"Creating database tables in {url}...")
        create_tables(url)
        logger.info("Database tables created successfully!")

        logger.info("Created tables:")
        for table_name in Base.metadata.tables.keys():
            logger.info(f"  - {table_name}")

    except Exception as e:
        logger.error(f"Error creating database tables: {e}")
        raise


if __name__ == "__main__":
    configure_logging(settings.LOG_LEVEL, settings.LOG_JSON)
    main(sys.argv[1] if len(sys.argv) > 1 else None)

"""
Tests for the relational export of clustering results.
"""

import pytest
from sqlalchemy import func, select
from sqlalchemy.orm import sessionmaker

from conftest import merge_example, run_engine
from app.core.models import TagCategory, TagEntry
from app.database.database import make_engine
from app.database.models import Base, Cluster, ClusterAddress, MergeEventRecord
from app.services.persistence import lookup_address, persist_results


@pytest.fixture
def session():
    engine = make_engine("sqlite://")
    Base.metadata.create_all(bind=engine)
    db = sessionmaker(bind=engine)()
    try:
        yield db
    finally:
        db.close()
        engine.dispose()


@pytest.fixture
def merged():
    builder, _ = merge_example()
    return run_engine(builder.records)


def test_persist_and_lookup(session, merged):
    tags = [TagEntry("b3", "Shop", TagCategory.PAYMENT_PROCESSOR)]
    counts = persist_results(session, merged, tags=tags)
    assert counts == {"clusters": 1, "addresses": 14, "merge_events": 3}

    cluster = lookup_address(session, "b7")
    assert cluster.representative == 0
    assert cluster.size == 14
    assert cluster.label == "Shop"
    assert cluster.category == "payment-processor"
    assert cluster.funded_balance_sat == 0
    assert [a.address_id for a in cluster.addresses] == list(range(14))

    # z was never co-spent, so it stays out of the size >= 2 export
    assert lookup_address(session, "z") is None

    event = session.get(MergeEventRecord, 3)
    assert event.component_sizes == [1, 1, 2, 10]
    assert event.max_increase == 2
    assert event.resulting_size == 14


def test_min_size_one_exports_every_address(session, merged):
    counts = persist_results(session, merged, min_size=1)
    assert counts["addresses"] == len(merged.addresses)
    z = lookup_address(session, "z")
    assert z.size == 1
    assert z.funded_balance_sat == 1200


def test_persist_replaces_earlier_export(session, merged, reuse_engine):
    persist_results(session, reuse_engine)
    persist_results(session, merged)
    assert session.scalar(select(func.count()).select_from(Cluster)) == 1
    assert session.scalar(select(func.count()).select_from(ClusterAddress)) == 14
    assert session.scalar(select(func.count()).select_from(MergeEventRecord)) == 3

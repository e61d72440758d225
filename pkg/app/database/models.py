from typing import List, Optional
from datetime import datetime
from sqlalchemy import BigInteger, DateTime, ForeignKey, Integer, JSON, String
from sqlalchemy.sql import func
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column, relationship


class Base(DeclarativeBase):
    """Base class for all SQLAlchemy ORM models."""
    pass


class Cluster(Base):
    """Summary row for one address cluster, keyed by its representative."""
    __tablename__ = "clusters"

    representative: Mapped[int] = mapped_column(BigInteger, primary_key=True)
    size: Mapped[int] = mapped_column(BigInteger, nullable=False, index=True)
    label: Mapped[Optional[str]] = mapped_column(String, nullable=True)
    category: Mapped[Optional[str]] = mapped_column(String, nullable=True, index=True)
    funded_balance_sat: Mapped[int] = mapped_column(
        BigInteger,
        nullable=False,
        default=0,
        comment="Sum of current balances of member addresses"
    )
    exported_at: Mapped[datetime] = mapped_column(
        DateTime(timezone=True),
        server_default=func.now(),
        nullable=False
    )

    addresses: Mapped[List["ClusterAddress"]] = relationship(
        "ClusterAddress",
        back_populates="cluster",
        cascade="all, delete-orphan",
        order_by="ClusterAddress.address_id"
    )

    def __repr__(self) -> str:
        return f"<Cluster(representative={self.representative}, size={self.size}, label={self.label})>"


class ClusterAddress(Base):
    """Membership of an address in a cluster."""
    __tablename__ = "cluster_addresses"

    address: Mapped[str] = mapped_column(String, primary_key=True)
    address_id: Mapped[int] = mapped_column(BigInteger, nullable=False, unique=True)
    representative: Mapped[int] = mapped_column(
        BigInteger,
        ForeignKey("clusters.representative", ondelete="CASCADE"),
        nullable=False,
        index=True
    )
    current_sat: Mapped[int] = mapped_column(BigInteger, nullable=False, default=0)
    max_sat: Mapped[int] = mapped_column(BigInteger, nullable=False, default=0)

    cluster: Mapped["Cluster"] = relationship("Cluster", back_populates="addresses")

    def __repr__(self) -> str:
        return f"<ClusterAddress(address={self.address}, representative={self.representative})>"


class MergeEventRecord(Base):
    """One logged merge: a transaction that united two or more clusters."""
    __tablename__ = "merge_events"

    tx_ordinal: Mapped[int] = mapped_column(BigInteger, primary_key=True)
    txid: Mapped[str] = mapped_column(String(64), nullable=False, unique=True)
    component_sizes: Mapped[list] = mapped_column(JSON, nullable=False)
    max_increase: Mapped[int] = mapped_column(Integer, nullable=False, index=True)
    resulting_size: Mapped[int] = mapped_column(BigInteger, nullable=False)

    def __repr__(self) -> str:
        return f"<MergeEventRecord(tx_ordinal={self.tx_ordinal}, sizes={self.component_sizes})>"

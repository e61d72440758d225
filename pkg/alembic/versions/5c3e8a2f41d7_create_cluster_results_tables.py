"""Create cluster results tables

Revision ID: 5c3e8a2f41d7
Revises:
Create Date: 2026-10-19 10:12:31.402118

"""
from typing import Sequence, Union

from alembic import op
import sqlalchemy as sa


# revision identifiers, used by Alembic.
revision: str = '5c3e8a2f41d7'
down_revision: Union[str, None] = None
branch_labels: Union[str, Sequence[str], None] = None
depends_on: Union[str, Sequence[str], None] = None


def upgrade() -> None:
    op.create_table(
        'clusters',
        sa.Column('representative', sa.BigInteger(), nullable=False),
        sa.Column('size', sa.BigInteger(), nullable=False),
        sa.Column('label', sa.String(), nullable=True),
        sa.Column('category', sa.String(), nullable=True),
        sa.Column('funded_balance_sat', sa.BigInteger(), nullable=False, comment='Sum of current balances of member addresses'),
        sa.Column('exported_at', sa.DateTime(timezone=True), server_default=sa.text('(CURRENT_TIMESTAMP)'), nullable=False),
        sa.PrimaryKeyConstraint('representative'),
    )
    op.create_index(op.f('ix_clusters_size'), 'clusters', ['size'], unique=False)
    op.create_index(op.f('ix_clusters_category'), 'clusters', ['category'], unique=False)

    op.create_table(
        'cluster_addresses',
        sa.Column('address', sa.String(), nullable=False),
        sa.Column('address_id', sa.BigInteger(), nullable=False),
        sa.Column('representative', sa.BigInteger(), nullable=False),
        sa.Column('current_sat', sa.BigInteger(), nullable=False),
        sa.Column('max_sat', sa.BigInteger(), nullable=False),
        sa.ForeignKeyConstraint(['representative'], ['clusters.representative'], ondelete='CASCADE'),
        sa.PrimaryKeyConstraint('address'),
        sa.UniqueConstraint('address_id'),
    )
    op.create_index(op.f('ix_cluster_addresses_representative'), 'cluster_addresses', ['representative'], unique=False)

    op.create_table(
        'merge_events',
        sa.Column('tx_ordinal', sa.BigInteger(), nullable=False),
        sa.Column('txid', sa.String(length=64), nullable=False),
        sa.Column('component_sizes', sa.JSON(), nullable=False),
        sa.Column('max_increase', sa.Integer(), nullable=False),
        sa.Column('resulting_size', sa.BigInteger(), nullable=False),
        sa.PrimaryKeyConstraint('tx_ordinal'),
        sa.UniqueConstraint('txid'),
    )
    op.create_index(op.f('ix_merge_events_max_increase'), 'merge_events', ['max_increase'], unique=False)


def downgrade() -> None:
    op.drop_index(op.f('ix_merge_events_max_increase'), table_name='merge_events')
    op.drop_table('merge_events')
    op.drop_index(op.f('ix_cluster_addresses_representative'), table_name='cluster_addresses')
    op.drop_table('cluster_addresses')
    op.drop_index(op.f('ix_clusters_category'), table_name='clusters')
    op.drop_index(op.f('ix_clusters_size'), table_name='clusters')
    op.drop_table('clusters')

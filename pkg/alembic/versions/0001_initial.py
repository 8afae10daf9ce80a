"""results store: runs, run records, index builds

Revision ID: 0001_initial
Revises:
Create Date: 2026-10-18 00:00:00
"""

from alembic import op
import sqlalchemy as sa

revision = '0001_initial'
down_revision = None
branch_labels = None
depends_on = None


def upgrade() -> None:
    op.create_table(
        'experiment_runs',
        sa.Column('id', sa.String(36), primary_key=True),
        sa.Column('created_at', sa.DateTime()),
        sa.Column('command', sa.String(20), nullable=False),
        sa.Column('dataset', sa.String(255)),
        sa.Column('weight_kind', sa.String(20)),
        sa.Column('seed', sa.Integer()),
        sa.Column('spec', sa.JSON()),
        sa.Column('csv_path', sa.String(500)),
        sa.Column('status', sa.String(20)),
        sa.Column('error_message', sa.Text()),
    )
    op.create_table(
        'run_records',
        sa.Column('id', sa.String(36), primary_key=True),
        sa.Column('run_id', sa.String(36), sa.ForeignKey('experiment_runs.id'), nullable=False),
        sa.Column('method', sa.String(20), nullable=False),
        sa.Column('parameters', sa.JSON()),
        sa.Column('query_count', sa.Integer()),
        sa.Column('mean_us', sa.Float()),
        sa.Column('p50_us', sa.Float()),
        sa.Column('p95_us', sa.Float()),
        sa.Column('p99_us', sa.Float()),
        sa.Column('settled', sa.Float()),
        sa.Column('pushes', sa.Float()),
        sa.Column('oracle_calls', sa.Float()),
        sa.Column('false_hits', sa.Float()),
        sa.Column('path_cost', sa.Float()),
        sa.Column('vertices_bypassed', sa.Float()),
        sa.Column('lookups', sa.Float()),
        sa.Column('refinements', sa.Float()),
        sa.Column('cursor_pulls', sa.Float()),
        sa.Column('index_bytes', sa.BigInteger()),
        sa.Column('build_ms', sa.Float()),
        sa.Column('mismatches', sa.Integer()),
    )
    op.create_table(
        'index_builds',
        sa.Column('id', sa.String(36), primary_key=True),
        sa.Column('run_id', sa.String(36), sa.ForeignKey('experiment_runs.id'), nullable=False),
        sa.Column('method', sa.String(20), nullable=False),
        sa.Column('dataset', sa.String(255)),
        sa.Column('parameters', sa.JSON()),
        sa.Column('index_bytes', sa.BigInteger()),
        sa.Column('build_ms', sa.Float()),
        sa.Column('path', sa.String(500)),
        sa.Column('created_at', sa.DateTime()),
    )


def downgrade() -> None:
    op.drop_table('index_builds')
    op.drop_table('run_records')
    op.drop_table('experiment_runs')

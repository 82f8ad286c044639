"""add runs

Revision ID: 5b1e7f0c2a91
Revises: 
Create Date: 2024-01-12 10:04:51.213408

"""
from alembic import op
import sqlalchemy as sa


# revision identifiers, used by Alembic.
revision = '5b1e7f0c2a91'
down_revision = None
branch_labels = None
depends_on = None

RUN_KINDS = ('regime_check', 'rho_interval', 'regime_table', 'simulate', 'couple', 'galerkin', 'kolmogorov',
             'monitor', 'demo', 'continuous_dependence')


def upgrade() -> None:
    # ### commands auto generated by Alembic - please adjust! ###
    op.create_table('runs',
    sa.Column('id', sa.Integer(), nullable=False),
    sa.Column('kind', sa.Enum(*RUN_KINDS, name='runkind'), nullable=False),
    sa.Column('seed', sa.BigInteger(), nullable=True),
    sa.Column('config', sa.JSON(), nullable=False),
    sa.Column('verdict', sa.JSON(), nullable=True),
    sa.Column('checksum', sa.String(length=64), nullable=True),
    sa.Column('summary', sa.JSON(), nullable=False),
    sa.Column('created_at', sa.DateTime(), nullable=True),
    sa.PrimaryKeyConstraint('id')
    )
    op.create_index(op.f('ix_runs_id'), 'runs', ['id'], unique=False)
    op.create_index(op.f('ix_runs_kind'), 'runs', ['kind'], unique=False)
    # ### end Alembic commands ###


def downgrade() -> None:
    # ### commands auto generated by Alembic - please adjust! ###
    op.drop_index(op.f('ix_runs_kind'), table_name='runs')
    op.drop_index(op.f('ix_runs_id'), table_name='runs')
    op.drop_table('runs')
    sa.Enum(name='runkind').drop(op.get_bind(), checkfirst=True)
    # ### end Alembic commands ###

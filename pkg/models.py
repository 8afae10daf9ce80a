"""
Database Models for the kNN benchmark results store
"""

from sqlalchemy import Column, String, Integer, BigInteger, Float, DateTime, ForeignKey, Text, JSON
from sqlalchemy.ext.declarative import declarative_base
from sqlalchemy.orm import relationship
import uuid
from datetime import datetime

Base = declarative_base()


class ExperimentRun(Base):
    """ExperimentRun model - one invocation of build, query or verify"""
    __tablename__ = 'experiment_runs'

    id = Column(String(36), primary_key=True, default=lambda: str(uuid.uuid4()))
    created_at = Column(DateTime, default=datetime.utcnow)
    command = Column(String(20), nullable=False)  # build, query, verify
    dataset = Column(String(255))
    weight_kind = Column(String(20))  # distance | time
    seed = Column(Integer)
    spec = Column(JSON)  # ExperimentSpec as a dict
    csv_path = Column(String(500))
    status = Column(String(20), default='running')  # running, complete, failed
    error_message = Column(Text)

    # Relationships
    records = relationship("RunRecordRow", back_populates="run", cascade="all, delete-orphan")
    builds = relationship("IndexBuildRow", back_populates="run", cascade="all, delete-orphan")

    def to_dict(self):
        """Convert to dictionary for JSON serialization"""
        return {
            'id': self.id,
            'created_at': self.created_at.isoformat() if self.created_at else None,
            'command': self.command,
            'dataset': self.dataset,
            'weight_kind': self.weight_kind,
            'seed': self.seed,
            'spec': self.spec,
            'csv_path': self.csv_path,
            'status': self.status,
            'error_message': self.error_message
        }


class RunRecordRow(Base):
    """RunRecordRow model - aggregated statistics of one method at one parameter point"""
    __tablename__ = 'run_records'

    id = Column(String(36), primary_key=True, default=lambda: str(uuid.uuid4()))
    run_id = Column(String(36), ForeignKey('experiment_runs.id'), nullable=False)
    method = Column(String(20), nullable=False)
    parameters = Column(JSON)  # {k, density, object_kind, ...}
    query_count = Column(Integer)

    # Query times in microseconds
    mean_us = Column(Float)
    p50_us = Column(Float)
    p95_us = Column(Float)
    p99_us = Column(Float)

    # Per-query means of the operation counters
    settled = Column(Float)
    pushes = Column(Float)
    oracle_calls = Column(Float)
    false_hits = Column(Float)
    path_cost = Column(Float)
    vertices_bypassed = Column(Float)
    lookups = Column(Float)
    refinements = Column(Float)
    cursor_pulls = Column(Float)

    index_bytes = Column(BigInteger)
    build_ms = Column(Float)
    mismatches = Column(Integer, default=0)

    # Relationships
    run = relationship("ExperimentRun", back_populates="records")

    def to_dict(self):
        """Convert to dictionary for JSON serialization"""
        return {
            'id': self.id,
            'run_id': self.run_id,
            'method': self.method,
            'parameters': self.parameters,
            'query_count': self.query_count,
            'mean_us': self.mean_us,
            'p50_us': self.p50_us,
            'p95_us': self.p95_us,
            'p99_us': self.p99_us,
            'settled': self.settled,
            'pushes': self.pushes,
            'oracle_calls': self.oracle_calls,
            'false_hits': self.false_hits,
            'path_cost': self.path_cost,
            'vertices_bypassed': self.vertices_bypassed,
            'lookups': self.lookups,
            'refinements': self.refinements,
            'cursor_pulls': self.cursor_pulls,
            'index_bytes': self.index_bytes,
            'build_ms': self.build_ms,
            'mismatches': self.mismatches
        }


class IndexBuildRow(Base):
    """IndexBuildRow model - size and construction time of one index"""
    __tablename__ = 'index_builds'

    id = Column(String(36), primary_key=True, default=lambda: str(uuid.uuid4()))
    run_id = Column(String(36), ForeignKey('experiment_runs.id'), nullable=False)
    method = Column(String(20), nullable=False)  # gtree, road, silc, rtree, object_hierarchy
    dataset = Column(String(255))
    parameters = Column(JSON)
    index_bytes = Column(BigInteger)
    build_ms = Column(Float)
    path = Column(String(500))
    created_at = Column(DateTime, default=datetime.utcnow)

    # Relationships
    run = relationship("ExperimentRun", back_populates="builds")

    def to_dict(self):
        """Convert to dictionary for JSON serialization"""
        return {
            'id': self.id,
            'run_id': self.run_id,
            'method': self.method,
            'dataset': self.dataset,
            'parameters': self.parameters,
            'index_bytes': self.index_bytes,
            'build_ms': self.build_ms,
            'path': self.path,
            'created_at': self.created_at.isoformat() if self.created_at else None
        }

import pytest
from sqlalchemy.orm import sessionmaker

from config import parse_size
from database import init_db, make_engine
from harness.spec import ExperimentSpec, RunRecord
from models import ExperimentRun, IndexBuildRow, RunRecordRow


@pytest.fixture
def session():
    engine = init_db(make_engine('sqlite://'))
    db = sessionmaker(bind=engine)()
    yield db
    db.close()


def test_run_with_records_and_builds(session):
    spec = ExperimentSpec(dataset='DE', seed=3)
    run = ExperimentRun(command='query', dataset='DE', weight_kind='distance', seed=3, spec=spec.to_dict())
    session.add(run)
    session.flush()

    row = RunRecord('road', 'DE', {'k': 10, 'density': 0.001}, query_count=100, mean_us=5.0,
                    vertices_bypassed=12.0).to_dict()
    row.pop('dataset')
    session.add(RunRecordRow(run_id=run.id, **row))
    session.add(IndexBuildRow(run_id=run.id, method='road', dataset='DE', parameters={'levels': 7},
                              index_bytes=1024, build_ms=3.5, path='indexes/DE.distance.road.bin'))
    session.commit()

    stored = session.query(ExperimentRun).filter_by(id=run.id).first()
    assert stored.status == 'running'
    assert stored.to_dict()['spec']['seed'] == 3
    assert [r.method for r in stored.records] == ['road']
    record = stored.records[0].to_dict()
    assert record['parameters'] == {'k': 10, 'density': 0.001}
    assert record['vertices_bypassed'] == 12.0
    assert record['false_hits'] is None
    assert stored.builds[0].to_dict()['index_bytes'] == 1024


def test_deleting_a_run_removes_its_rows(session):
    run = ExperimentRun(command='build', dataset='NW')
    run.builds.append(IndexBuildRow(method='silc', index_bytes=1, build_ms=1.0))
    session.add(run)
    session.commit()
    session.delete(run)
    session.commit()
    assert session.query(IndexBuildRow).count() == 0


@pytest.mark.parametrize('text, expected', [
    ('1024', 1024),
    ('512M', 512 << 20),
    ('8G', 8 << 30),
    ('1.5k', 1536),
    ('2GB', 2 << 30),
])
def test_parse_size(text, expected):
    assert parse_size(text) == expected


def test_parse_size_rejects_garbage():
    with pytest.raises(ValueError):
        parse_size('lots')

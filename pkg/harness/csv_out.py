"""
CSV Output
RunRecords and index build reports as CSV with `#` header lines carrying the
spec, seed and dataset needed to replay the run
"""

import json
import logging
import os

import pandas as pd

logger = logging.getLogger(__name__)

# Column order of the query CSV
RECORD_COLUMNS = [
    'method', 'dataset', 'k', 'density', 'object_kind', 'query_count',
    'mean_us', 'p50_us', 'p95_us', 'p99_us',
    'settled', 'pushes', 'oracle_calls', 'false_hits', 'path_cost', 'vertices_bypassed',
    'lookups', 'refinements', 'cursor_pulls',
    'index_bytes', 'build_ms', 'mismatches',
]

BUILD_COLUMNS = ['index', 'dataset', 'vertices', 'arcs', 'index_bytes', 'build_ms', 'path']


def _header_lines(header):
    for key, value in header.items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value, sort_keys=True)
        yield f'# {key}={value}\n'


def write_csv(path, rows, columns, header=None):
    """Write rows (dicts) under `# key=value` comment lines"""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame = pd.DataFrame(rows, columns=columns)
    with open(path, 'w', newline='') as handle:
        handle.writelines(_header_lines(header or {}))
        frame.to_csv(handle, index=False)
    logger.info('Wrote %d rows to %s', len(frame), path)
    return path


def record_rows(records):
    """Flatten RunRecords; parameters become their own columns"""
    rows = []
    for record in records:
        row = record.to_dict()
        parameters = row.pop('parameters')
        row.update({key: parameters.get(key) for key in ('k', 'density', 'object_kind')})
        rows.append(row)
    return rows


def write_records(path, records, header=None):
    return write_csv(path, record_rows(records), RECORD_COLUMNS, header)


def read_csv(path):
    """Returns (header dict, DataFrame)"""
    header = {}
    with open(path) as handle:
        for line in handle:
            if not line.startswith('#'):
                break
            key, _, value = line[1:].strip().partition('=')
            header[key] = value
    return header, pd.read_csv(path, comment='#')

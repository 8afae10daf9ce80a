"""
Object File IO
Newline-separated vertex ids with an optional `# density=<d> kind=<tag> seed=<s>` header
"""

import logging
import re

import numpy as np

from core.errors import GraphFormatError, ObjectSetError
from core.objects import ObjectKind, ObjectSet

logger = logging.getLogger(__name__)

_HEADER = re.compile(r'(\w+)=(\S+)')


def parse_header(line):
    """Key/value pairs of a `#` header line"""
    return dict(_HEADER.findall(line))


def load_objects(path, vertex_count):
    """
    Read an object file into an ObjectSet

    Duplicate ids collapse; the result is sorted.

    Raises:
        GraphFormatError: a line is not an integer
        ObjectSetError: the file lists no ids or an id is outside the graph
    """
    ids = []
    header = {}
    with open(path) as handle:
        for number, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith('#'):
                header.update(parse_header(line))
                continue
            try:
                ids.append(int(line))
            except ValueError:
                raise GraphFormatError(f'bad object id {line!r}', number) from None

    if not ids:
        raise ObjectSetError(f'object file {path} is empty')
    kind = header.get('kind', ObjectKind.FILE.value)
    seed = header.get('seed')
    objects = ObjectSet(
        np.array(ids, dtype=np.int64),
        vertex_count,
        ObjectKind(kind) if kind in ObjectKind._value2member_map_ else ObjectKind.FILE,
        int(seed) if seed not in (None, 'None') else None,
    )
    logger.info('Loaded %d objects from %s', len(objects), path)
    return objects


def save_objects(objects, path):
    with open(path, 'w') as handle:
        handle.write(f'# density={objects.density:.6g} kind={objects.kind.value} seed={objects.seed}\n')
        for v in objects.ids.tolist():
            handle.write(f'{v}\n')

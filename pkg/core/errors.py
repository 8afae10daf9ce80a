"""
Error types shared by the graph layer, the indexes and the harness
"""


class RoadKnnError(Exception):
    """Base class for every error raised by this package"""


class GraphFormatError(RoadKnnError, ValueError):
    """Malformed DIMACS or object input"""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f'line {line_number}: {message}'
        super().__init__(message)
        self.line_number = line_number


class ConnectivityError(RoadKnnError):
    """The graph is not connected; `vertex` cannot be reached from vertex 0"""

    def __init__(self, vertex):
        super().__init__(f'graph is disconnected: vertex {vertex} is stranded')
        self.vertex = vertex


class ObjectSetError(RoadKnnError, ValueError):
    """Invalid object set parameters or contents"""


class InfeasibleBucketError(ObjectSetError):
    """A min-distance bucket holds fewer vertices than requested"""


class IndexBuildError(RoadKnnError):
    """Index parameters cannot be satisfied for this graph"""

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class MemoryBudgetError(IndexBuildError):
    """SILC build refused: projected size exceeds the configured budget"""

    def __init__(self, estimate_bytes, budget_bytes):
        super().__init__(
            f'SILC index needs an estimated {estimate_bytes:,} bytes, '
            f'budget is {budget_bytes:,} bytes'
        )
        self.estimate_bytes = estimate_bytes
        self.budget_bytes = budget_bytes


class IndexFormatError(RoadKnnError):
    """Binary cache file has the wrong magic, version or kind"""


class QueueEmptyError(RoadKnnError, IndexError):
    """pop_min on an empty queue"""


class VerificationError(RoadKnnError):
    """A method disagreed with the Dijkstra oracle"""

    def __init__(self, message, reproducer):
        super().__init__(message)
        self.reproducer = reproducer

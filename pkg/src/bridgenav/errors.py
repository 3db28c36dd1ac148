"""Exception types raised across the pipeline."""


class BridgenavError(Exception):
    """Base class for all library errors."""


class DegenerateInput(BridgenavError):
    """Geometric input collapses to a point/line and the operation is undefined."""


class TooFewPoints(BridgenavError):
    """Not enough points to perform the requested operation."""


class SingularCovariance(BridgenavError):
    """Covariance regularization failed to produce a usable matrix."""


class UndefinedRatio(BridgenavError):
    """Cluster-count selection ratio is undefined (no neighbor relations at all)."""


class InvalidSpec(BridgenavError):
    """Synthetic structure specification has non-positive or inconsistent values."""


class UnknownVertex(BridgenavError):
    """Vertex id not present in the graph."""


class MissingVertex(UnknownVertex):
    """Route planning was asked to start or end at a vertex that does not exist."""


class Disconnected(BridgenavError):
    """Operation requires a connected graph."""


class NotEulerian(BridgenavError):
    """Graph does not admit an Eulerian trail from the requested start."""


class BudgetExceeded(BridgenavError):
    """Exhaustive search exceeded its expansion budget."""


class BudgetExhausted(BridgenavError):
    """Sampling-based planner ran out of iterations without reaching the goal."""


class InvalidEndpoint(BridgenavError):
    """Planner start or goal configuration is not collision free."""


class MissingLayer(BridgenavError):
    """Requested render layer is not present in the run artifacts."""


class CloudParseError(BridgenavError):
    """Malformed point cloud input file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)

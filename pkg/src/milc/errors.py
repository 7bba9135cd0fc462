class InfeasibleError(Exception):
    """No plan can meet the latency bound; ``vertex`` is a witness location."""

    def __init__(self, vertex: int, reason: str = "latency bound cannot be met"):
        super().__init__(f"infeasible at vertex {vertex}: {reason}")
        self.vertex = vertex
        self.reason = reason


class SimulationError(Exception):
    """A plan cannot be executed as written (e.g. a UAV would arrive late)."""

    def __init__(self, message: str, event: dict | None = None):
        super().__init__(message)
        self.event = event or {}

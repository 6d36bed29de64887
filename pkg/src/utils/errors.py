from typing import List, Optional


class CutFlowError(Exception):
    """Base class for failures of the simulation pipeline"""


class SingularSystemError(CutFlowError):
    """A direct sparse solve failed (zero pivot or structurally singular matrix)"""

    def __init__(self, row: int = -1, condition_estimate: Optional[float] = None,
                 context: str = ""):
        self.row = row
        self.condition_estimate = condition_estimate
        self.context = context
        parts = [f"singular system at row {row}"]
        if condition_estimate is not None:
            parts.append(f"condition estimate {condition_estimate:.3e}")
        if context:
            parts.append(context)
        super().__init__(", ".join(parts))

    def with_context(self, context: str) -> "SingularSystemError":
        merged = f"{context}: {self.context}" if self.context else context
        return SingularSystemError(self.row, self.condition_estimate, merged)


class ConvergenceError(CutFlowError):
    """Newton iteration did not reach its tolerance"""

    def __init__(self, residual_history: List[float], slab_index: Optional[int] = None):
        self.residual_history = list(residual_history)
        self.slab_index = slab_index
        where = f" on slab {slab_index}" if slab_index is not None else ""
        history = ", ".join(f"{r:.3e}" for r in self.residual_history)
        super().__init__(
            f"Newton iteration did not converge{where} after "
            f"{len(self.residual_history) - 1} iterations; residual norms: [{history}]"
        )


class GeometryError(CutFlowError):
    """Interface or phase geometry unusable (empty interface, empty drop)"""


class EquationOfStateError(CutFlowError):
    """Surface tension evaluated outside the admissible concentration range"""

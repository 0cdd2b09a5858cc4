"""
Exception hierarchy for the simulator, dataset pipeline and estimator.

Every failure the CLI can report as a runtime failure derives from
ExoforceError, so callers can catch one type at the boundary.
"""


class ExoforceError(Exception):
    """Base class for all domain failures"""


class ConfigError(ExoforceError):
    """Run configuration could not be parsed or validated"""


class DegenerateContactError(ExoforceError):
    """Two contact spheres share the same center"""

    def __init__(self, rod_station: int, finger_sphere: int):
        self.rod_station = rod_station
        self.finger_sphere = finger_sphere
        super().__init__(
            f"degenerate contact: rod station {rod_station} and finger sphere "
            f"C_{finger_sphere} have coincident centers"
        )


class NoConvergenceError(ExoforceError):
    """Newton iteration did not reach the residual tolerance"""

    def __init__(self, message: str, iterations: int, residual_norm: float):
        self.iterations = iterations
        self.residual_norm = residual_norm
        super().__init__(
            f"no convergence: {message} (iterations={iterations}, residual={residual_norm:.3e})"
        )


class SingularJacobianError(ExoforceError):
    """Linear solve of the Newton step failed"""


class SweepAbortedError(ExoforceError):
    """A continuation step failed after all increment refinements"""

    def __init__(self, failed_index: int, u: float, result):
        self.failed_index = failed_index
        self.u = u
        self.result = result
        super().__init__(f"sweep aborted at schedule index {failed_index} (u={u:.4f} N)")


class UnknownFamilyError(ExoforceError):
    """Shape family is not one of R01, Rs, Rcc, Rsc, RLP"""


class InsufficientCombinationsError(ExoforceError):
    """Scenario grid has fewer unique combinations than requested"""


class EmptyBatchError(ExoforceError):
    """Forward pass called with no images"""


class EmptySplitError(ExoforceError):
    """A dataset split needed for training is empty"""


class MetricsLengthError(ExoforceError):
    """Predicted and actual series differ in length or are too short"""


class CheckpointError(ExoforceError):
    """Checkpoint is missing, truncated or built for another network"""

"""Exception hierarchy. Every error carries a short machine-readable category."""

import numpy as np


class TetradLogitError(Exception):
    category = "error"


class InvalidCutoffError(TetradLogitError, ValueError):
    category = "invalid-cutoff"


class EmptyNetworkError(TetradLogitError, ValueError):
    category = "empty-network"


class TooFewNodesError(TetradLogitError, ValueError):
    category = "too-few-nodes"


class ConfigurationError(TetradLogitError, ValueError):
    category = "configuration"


class ContractError(TetradLogitError, ValueError):
    category = "contract"


class DgpConfigError(ConfigurationError):
    category = "dgp-config"


class IngestionError(TetradLogitError, ValueError):
    category = "ingestion"


class NoInformationError(TetradLogitError):
    category = "no-information"


class SeparationError(TetradLogitError):
    """The logit likelihood has no finite maximizer.

    ``direction`` is a unit vector along which the likelihood keeps increasing.
    """

    category = "separation"

    def __init__(self, message, direction=None):
        super().__init__(message)
        self.direction = None if direction is None else np.asarray(direction, dtype=float)


class RankDeficiencyError(TetradLogitError, np.linalg.LinAlgError):
    """Singular Hessian or design; ``null_direction`` spans (part of) the null space."""

    category = "rank-deficiency"

    def __init__(self, message, null_direction=None):
        super().__init__(message)
        self.null_direction = None if null_direction is None else np.asarray(null_direction, dtype=float)

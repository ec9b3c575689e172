"""Exception types shared across the package."""


class DegenerateLogitsError(ValueError):
    """Logit vector is (near-)constant, so its standard deviation is unusable."""


class InfiniteDivergenceError(ValueError):
    """KL/cross-entropy is infinite: the reference puts mass where the other has none."""


class UnattainableConstraintError(ValueError):
    """Expectation target lies outside the open interval spanned by the states."""


class ConvergenceError(RuntimeError):
    """Iterative solve hit its iteration budget; carries the last iterate."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class CsvParseError(ValueError):
    """Malformed data file; the message names the offending row."""


class CheckpointError(ValueError):
    """Checkpoint file is missing, truncated, or structurally invalid."""


class CheckpointVersionError(CheckpointError):
    """Checkpoint format_version is not supported by this build."""


class ConfigError(ValueError):
    """Run configuration is malformed (unknown keys, bad values, wrong types)."""

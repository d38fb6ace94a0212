"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """A numerical routine failed (e.g. a factorization of a non-PD matrix)."""


class DivergenceError(NumericalError):
    """An adaptive update produced non-finite weights.

    ``trial_index`` and ``sample_index`` are filled in by the experiment
    runner; they are ``None`` when the error is raised by a bare step
    function.
    """

    def __init__(self, message, trial_index=None, sample_index=None):
        super().__init__(message)
        self.trial_index = trial_index
        self.sample_index = sample_index


class ConfigError(ValueError):
    """A configuration file could not be parsed or validated."""


class AnalysisViolation(ValueError):
    """Inputs contradict the steady-state analysis assumptions."""

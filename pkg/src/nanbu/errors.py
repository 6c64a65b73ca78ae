"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid run configuration.

    Carries the full list of violated constraints so a caller can report
    every problem at once instead of fixing them one by one.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NumericalError(RuntimeError):
    """A numerical procedure failed to converge; message carries diagnostics."""

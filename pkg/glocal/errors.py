"""Error kinds raised across glocal.

Each kind derives from the builtin a caller would naturally catch, so
``except ValueError`` still works around argument and geometry problems.
"""


class InvalidArgumentError(ValueError):
    pass


class GeometryError(ValueError):
    pass


class TopologyError(ValueError):
    pass


class ScheduleError(ValueError):
    pass


class ConfigValidationError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("Invalid configuration:\n  " + "\n  ".join(self.errors))


class SingularInteriorError(RuntimeError):
    def __init__(self, subdomain: str, detail: str = ""):
        self.subdomain = subdomain
        super().__init__(f"Interior block of subdomain '{subdomain}' is singular. {detail}".strip())


class ConfigurationError(RuntimeError):
    pass


class DivergenceError(RuntimeError):
    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class LivelockError(RuntimeError):
    def __init__(self, message: str, report=None):
        self.report = report
        super().__init__(message)


class StagnationError(ArithmeticError):
    pass


class NumericalError(ArithmeticError):
    pass

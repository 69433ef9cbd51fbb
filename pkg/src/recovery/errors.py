class RecoveryError(Exception):
    """Base failure of the recovery pipeline.

    ``detail`` is shown to the user; ``exit_code`` is what the CLI returns.
    """

    exit_code = 2
    # config location the failure came from, when known
    path: str | None = None

    def __init__(self, detail: str, exit_code: int | None = None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class ConfigError(RecoveryError):
    pass


class ExprSyntaxError(RecoveryError):
    def __init__(self, offset: int, expected: str, source: str = ""):
        self.offset = offset
        self.expected = expected
        self.source = source
        super().__init__(f"syntax error at offset {offset}: {expected}")


class ExprNameError(RecoveryError):
    pass


class ExprArityError(RecoveryError):
    pass


class ExprDomainError(RecoveryError):
    def __init__(self, subexpression: str, x, reason: str):
        self.subexpression = subexpression
        self.x = x
        self.reason = reason
        super().__init__(f"domain fault in '{subexpression}' at x={x}: {reason}")


class SpecialFunctionError(RecoveryError):
    pass


class ModelError(RecoveryError):
    pass


class HypothesisError(RecoveryError):
    pass


class NotAvailableError(RecoveryError):
    pass


class NotAdmissibleError(RecoveryError):
    pass


class SimulationError(RecoveryError):
    pass


class NumericalError(RecoveryError):
    exit_code = 3


class IntegrationError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class BracketError(NumericalError):
    pass


class IndeterminateError(NumericalError):
    pass

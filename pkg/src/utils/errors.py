"""Исключения библиотеки. ValidationFailure -> exit 1, ConsistencyFailure -> exit 2"""


class FbmRatesError(Exception):
    pass


class ValidationFailure(FbmRatesError, ValueError):
    """Неверные входные данные или параметры вне допустимой области"""


class ConsistencyFailure(FbmRatesError, RuntimeError):
    """Внутренняя несогласованность вычислений"""


class DomainError(ValidationFailure):
    pass


class GridMismatchError(ValidationFailure):
    pass


class ParameterRangeError(ValidationFailure):
    pass


class ContractViolationError(ValidationFailure):
    pass


class CovarianceError(ConsistencyFailure):
    pass


class QuadratureError(ConsistencyFailure):
    def __init__(self, message: str, estimate: float):
        super().__init__(f"{message} (achieved estimate={estimate!r})")
        self.estimate = estimate


class CertificateViolationError(ConsistencyFailure):
    pass


class OracleDisagreementError(ConsistencyFailure):
    pass


class InsufficientReplicatesError(ConsistencyFailure):
    def __init__(self, offending_n: list[int]):
        super().__init__(f"insufficient replicates: MC stderr exceeds the allowed fraction of the estimate at n={offending_n}")
        self.offending_n = offending_n


class UsageError(ValidationFailure):
    """Неверные аргументы командной строки"""

from typing import Any, Optional


class KirchhoffError(Exception):
    """Base error. Carries the process exit code the CLI should report."""

    exit_code = 2

    def __init__(self, detail: str, **context: Any):
        super().__init__(detail)
        self.detail = detail
        self.context = context


class ConfigError(KirchhoffError):
    exit_code = 1


class HypothesisViolation(KirchhoffError):
    pass


class NotInLambda(KirchhoffError):
    pass


class BracketingFailed(KirchhoffError):
    def __init__(self, detail: str, scan: Optional[Any] = None, iterate: Optional[Any] = None):
        super().__init__(detail)
        self.scan = scan
        self.iterate = iterate


class InitialIterateNotInLambda(KirchhoffError):
    pass


class ShootingBracketFailed(KirchhoffError):
    pass


class TNotFound(KirchhoffError):
    pass


class MixtureFitFailed(KirchhoffError):
    pass

"""Exception hierarchy shared by every stage of the pipeline."""


class PremlogError(Exception):
    """Base class for all engine errors."""


class ParseError(PremlogError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        where = f" at line {line}, column {col}" if line is not None else ""
        super().__init__(f"{message}{where}")


class ProgramError(PremlogError):
    """Structurally invalid program (arity conflicts, bad aggregates, ...)."""


class FactFileError(PremlogError):
    def __init__(self, message, row=None):
        self.row = row
        where = f"row {row}: " if row is not None else ""
        super().__init__(f"{where}{message}")


class AnalysisError(PremlogError):
    pass


class NotStratifiable(AnalysisError):
    pass


class InliningCycle(AnalysisError):
    pass


class UnsafeRule(AnalysisError):
    pass


class RewriteError(PremlogError):
    pass


class NotPushable(RewriteError):
    pass


class NotRadical(RewriteError):
    pass


class DemandNotDerivable(RewriteError):
    pass


class EvaluationError(PremlogError):
    pass


class CapExceeded(EvaluationError):
    """Raised when a stratum does not reach its fixpoint within the cap.

    Carries the partial interpretation and the statistics gathered so far.
    """

    def __init__(self, message, partial=None, stats=None):
        super().__init__(message)
        self.partial = partial
        self.stats = stats


class UnboundModeArg(EvaluationError):
    pass


class DimensionMismatch(EvaluationError):
    pass


class NonConvergence(EvaluationError):
    pass

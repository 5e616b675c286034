"""Exception hierarchy shared by all hyprank modules."""


class HyprankError(Exception):
    """Base class for all hyprank errors."""


class DataError(HyprankError):
    """Bad input data: scenarios, sources, tokens, hypotheses."""


class UnknownSourceError(DataError):
    def __init__(self, source_id):
        super().__init__(f"unknown source: {source_id!r}")
        self.source_id = source_id


class InvalidTokenError(DataError):
    def __init__(self, token):
        super().__init__(f"invalid token: {token!r}")
        self.token = token


class InvalidHypothesisError(DataError):
    def __init__(self, reason=""):
        msg = "invalid hypothesis"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class MalformedScenarioError(DataError):
    def __init__(self, reason=""):
        msg = "malformed scenario"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class InvalidModelError(DataError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid model: " + "; ".join(self.violations))


class EmptyReferenceError(DataError):
    def __init__(self):
        super().__init__("empty reference")


class DuplicateHypothesisError(DataError):
    def __init__(self):
        super().__init__("duplicate hypothesis")


class QualityRangeError(DataError):
    def __init__(self):
        super().__init__("quality not in [0, 1]")


class BudgetError(HyprankError):
    """Search work limits."""


class BudgetExceededError(BudgetError):
    def __init__(self, budget):
        super().__init__(f"search budget exceeded ({budget} node expansions)")
        self.budget = budget


class SpaceTooLargeError(BudgetError):
    def __init__(self, size, cap):
        super().__init__(f"space too large for oracle ({size} > cap {cap})")
        self.size = size
        self.cap = cap

"""Exception hierarchy shared by every mwkit module."""

from __future__ import annotations


class MWError(Exception):
    """Base class for all mwkit errors."""


class ValidationError(MWError):
    """A graph or system description failed validation.

    ``issues`` holds every problem found, as ``(kind, subject)`` pairs such as
    ``("SinkVertex", "v")`` or ``("NotContraction", "2")``.
    """

    def __init__(self, issues):
        self.issues = list(issues)
        text = ", ".join(f"{kind}({subject})" for kind, subject in self.issues)
        super().__init__(text or "invalid description")

    def kinds(self):
        return {kind for kind, _ in self.issues}


class DifferentStartVertex(MWError):
    pass


class InvalidPath(MWError):
    pass


class NotACycle(MWError):
    pass


class TagMismatch(MWError):
    pass


class DimensionMismatch(MWError):
    pass


class MaxIterationsExceeded(MWError):
    """Hutchinson iteration hit its budget; ``best`` carries the last iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class PrefixTooShort(MWError):
    def __init__(self, required_depth):
        super().__init__(f"prefix too short, need depth >= {required_depth}")
        self.required_depth = required_depth


class ChainMismatch(MWError):
    pass


class PointNotOnAttractor(MWError):
    pass


class ResolutionTooCoarse(MWError):
    pass


class NoQualifyingCenter(MWError):
    pass


class GridMismatch(MWError):
    pass


class OrderMismatch(MWError):
    pass


class CertificateInvalid(MWError):
    pass


class SingularAtSample(MWError):
    def __init__(self, sample):
        super().__init__(f"w-matrix singular at sample {sample}")
        self.sample = sample


class NoConsistentMatching(MWError):
    def __init__(self, sample):
        super().__init__(f"no nonzero perfect matching at sample {sample}")
        self.sample = sample


class InconsistentOverlap(MWError):
    def __init__(self, i, j):
        super().__init__(f"cover sets {i} and {j} overlap with different permutations")
        self.pair = (i, j)


class GraphMismatch(MWError):
    pass


class NotTotallyDisconnected(MWError):
    def __init__(self, which, verdict=None):
        super().__init__(f"system {which} is not certified totally disconnected ({verdict})")
        self.which = which
        self.verdict = verdict


class ConfigError(MWError):
    """Parse error in a text input; ``line`` is 1-based when known."""

    def __init__(self, message, line=None, field=None):
        where = [f"line {line}"] if line is not None else []
        where += [field] if field else []
        super().__init__((", ".join(where) + ": " if where else "") + message)
        self.line = line
        self.field = field


class CertificateParse(ConfigError):
    pass

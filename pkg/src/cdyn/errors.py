"""Exception hierarchy shared by every cdyn module."""


class CdynError(Exception):
    """Base class for solver and validation failures."""


# numerics
class NonConvergence(CdynError):
    pass


class SingularJacobian(CdynError):
    pass


class MaxIters(CdynError):
    pass


class Diverged(CdynError):
    pass


# dynamics
class CountMismatch(CdynError):
    pass


class NotAttracting(CdynError):
    pass


class OutOfBasin(CdynError):
    pass


class BranchAmbiguity(CdynError):
    pass


class OutOfDisc(CdynError):
    pass


# raster
class NoAttractor(CdynError):
    pass


# lensing
class PoleProximity(CdynError):
    pass


class DegenerateRing(CdynError):
    pass


class NearCriticalImage(CdynError):
    pass


class ArgumentJump(CdynError):
    pass


class NonPositiveInput(CdynError, ValueError):
    pass


class EqualDegrees(CdynError, ValueError):
    pass


# cli / scene files
class ParseError(CdynError, ValueError):
    pass


class InvalidConfig(CdynError, ValueError):
    pass

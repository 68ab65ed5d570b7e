"""Exception types raised by gravkit."""


class GravError(Exception):
    """Base class for all gravkit errors."""


class MissingJoint(GravError):
    pass


class DegenerateSegment(GravError):
    pass


class NonFiniteInput(GravError):
    pass


class NonPositiveLength(GravError):
    pass


class InvalidRom(GravError):
    pass


class OutOfRom(GravError):
    pass


class InvalidSeed(GravError):
    """Seed configuration of a finger violates RoM or collides beyond epsilon."""

    def __init__(self, finger: str, verdict) -> None:
        super().__init__(f"seed configuration invalid for {finger}: {verdict}")
        self.finger = finger
        self.verdict = verdict


class SimulationLimitExceeded(GravError):
    """Visited-configuration cap reached while flood filling a finger."""


class EmptyVolume(GravError):
    pass


class NonPositiveScale(GravError):
    pass


class ParseError(GravError):
    pass


class SchemaError(GravError):
    pass


class MeshNotFound(GravError):
    pass

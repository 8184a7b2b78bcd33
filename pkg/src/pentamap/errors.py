"""Exception types raised by pentamap."""


class PentamapError(Exception):
    """Base class for domain errors (CLI exit code 2)."""


class NoPentagon(PentamapError):
    """The chart point has a negative radicand, so no pentagon sits there."""


class OutsideRegion(PentamapError):
    """A metric quantity was requested where the radicand is not positive."""


class OutsideModuli(OutsideRegion):
    """A map point was requested outside the moduli space (Q < 0)."""


class TangentPole(PentamapError):
    """Some vertex angle equals pi, so its half-angle tangent is infinite."""


class PoleHit(PentamapError):
    """A rational function was evaluated on (or numerically at) its pole set."""


class SeedNotFixed(PentamapError):
    """The seed pentagon is not fixed by the isometry being traced."""


class LostLock(PentamapError):
    """The continuation corrector failed to return to the traced locus."""


class RadicandVanished(PentamapError):
    """EG - F^2 came too close to zero along a Beltrami solution path."""


class LeftDomain(PentamapError):
    """A Beltrami solution path ran into a tangent pole or left the chart."""


class DidNotConverge(PentamapError):
    """An iterative solver stopped before meeting its convergence test."""

"""Exception types shared across the skyroute modules."""

from __future__ import annotations


class SkyrouteError(Exception):
    """Base class for all errors raised by this package."""


class PlacementInfeasible(SkyrouteError):
    """Node placement could not satisfy the minimum-separation constraint."""


class ParseError(SkyrouteError):
    """A serialized artifact could not be parsed.

    Carries the offending line number when the source is line-oriented.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GridIncomplete(SkyrouteError):
    """A weather series is missing a (node, time) cell."""

    def __init__(self, node_id: int, t: float):
        super().__init__(f"missing weather sample for node {node_id} at t={t}")
        self.node_id = node_id
        self.t = t


class WeatherRangeError(SkyrouteError):
    """A weather value lies outside its documented range."""


class OutOfHorizon(SkyrouteError):
    """A weather lookup fell outside the series horizon."""


class CrosswindExceedsAirspeed(SkyrouteError):
    """The crosswind component is too strong for the drone to hold its track."""


class NoRoute(SkyrouteError):
    """No feasible route exists between the requested endpoints."""


class ShapeMismatch(SkyrouteError):
    """Tensor operands have incompatible shapes."""


class NonFiniteGradient(SkyrouteError):
    """A gradient contained NaN or infinity; the optimizer step was aborted."""


class UnknownNode(SkyrouteError):
    """A record references a node that is not part of the network."""


class Diverged(SkyrouteError):
    """Training loss became non-finite."""

"""Event modeling as equivalent current sources.

A disturbance at a bus is replaced by a current source injecting the
change in the element's current.  On a sample stream this is a
multiplicative (1 + alpha) rescaling of the affected bus's current row
over the event span; alpha = -1 is a complete disconnection, a large
positive alpha a fault-like surge.  In whitened voltage coordinates a
stationary event of this kind perturbs the identity covariance by a
rank-one Hermitian matrix whose sign and size follow (1 + alpha)^2 - 1.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import inverse_sqrt_hermitian
from .netmodel import NetworkGraph, nodal_admittance

EVENT_CLASSES = ("FLT", "GL", "LI", "LS", "SC", "SA", "LT", "DG")


@dataclass(frozen=True)
class EventPreset:
    """Named single-bus disturbance parameterization.

    The labels follow common distribution-event shorthand; the numbers
    are configuration chosen so the presets separate cleanly in criteria
    space, not physical constants.  ``duration_frac`` is the event span
    as a fraction of the analysis window, anchored at its end.
    """

    label: str
    alpha: float
    duration_frac: float
    note: str


# Severe surge-type presets (FLT, SA, LT) use current gains orders of
# magnitude above the load fluctuation scale; shedding/loss presets use
# partial or complete row attenuation.
EVENT_PRESETS: dict[str, EventPreset] = {
    p.label: p
    for p in (
        EventPreset("FLT", 150.0, 0.30, "short-circuit style current surge"),
        EventPreset("GL", -1.0, 0.35, "complete supply loss at the bus"),
        EventPreset("LI", 1.5, 0.50, "sustained load increase"),
        EventPreset("LS", -0.6, 0.50, "partial load shedding"),
        EventPreset("SC", 0.8, 0.15, "brief switching bump"),
        EventPreset("SA", 800.0, 0.85, "sustained extreme surge"),
        EventPreset("LT", 25.0, 0.70, "long moderate surge"),
        EventPreset("DG", 3.0, 0.45, "generation hookup style step"),
    )
}


@dataclass(frozen=True)
class EventSpec:
    """Single-bus event: which bus, how strong, and when.

    ``alpha`` scales the bus current by (1 + alpha) and must be >= -1;
    ``duration`` of None means the event persists to the window end.
    """

    node: int
    alpha: float
    label: str = "CUSTOM"
    onset: int = 0
    duration: int | None = None

    def __post_init__(self):
        if self.alpha < -1:
            raise ValueError(f"alpha must be >= -1, got {self.alpha}")
        if self.node < 1:
            raise ValueError("events cannot target the reference node")
        if self.onset < 0:
            raise ValueError("onset must be >= 0")
        if self.duration is not None and self.duration < 0:
            raise ValueError("duration must be >= 0")
        if self.label != "CUSTOM" and self.label not in EVENT_CLASSES:
            raise ValueError(f"unknown event class {self.label!r}")

    def span(self, t: int) -> tuple[int, int]:
        """Half-open sample range [start, stop) the event covers."""
        if self.onset >= t:
            raise ValueError(f"onset {self.onset} outside window of {t} samples")
        stop = t if self.duration is None else min(t, self.onset + self.duration)
        return self.onset, stop


def from_preset(
    label: str, node: int, t: int, onset: int | None = None
) -> EventSpec:
    """Instantiate a preset on a bus for a T-sample window.

    Presets are anchored at the window end: the span is the last
    ``duration_frac`` of the window unless an onset is given.
    """
    preset = EVENT_PRESETS[label]
    duration = max(1, int(round(preset.duration_frac * t)))
    if onset is None:
        onset = t - duration
    return EventSpec(
        node=node, alpha=preset.alpha, label=label, onset=onset, duration=duration
    )


def compensation_source(i_pre: complex, i_post: complex) -> complex:
    """Equivalent injected current: the change through the element."""
    return i_post - i_pre


def apply_event(series: np.ndarray, spec: EventSpec) -> np.ndarray:
    """Scale the target bus's row by (1 + alpha) over the event span.

    ``series`` is nodes x samples with row k-1 holding bus k; all other
    rows and samples are untouched.  Returns a copy.
    """
    series = np.asarray(series)
    if series.ndim != 2:
        raise ValueError("series must be 2-D (nodes x samples)")
    n, t = series.shape
    if spec.node > n:
        raise ValueError(f"event node {spec.node} outside network of {n} buses")
    start, stop = spec.span(t)
    out = series.copy()
    out[spec.node - 1, start:stop] = (1.0 + spec.alpha) * out[spec.node - 1, start:stop]
    return out


def impedance_matrix(graph: NetworkGraph) -> np.ndarray:
    """Reduced nodal impedance matrix (inverse of the admittance matrix).

    Entrywise this is the complex common-path impedance of the two
    buses' routes to the substation, which doubles as a cross-check in
    the tests.
    """
    y = nodal_admittance(graph)
    if y.shape[0] == 0:
        return y
    return np.linalg.inv(y)


@dataclass(frozen=True)
class PerturbationMatrix:
    """Rank-one Hermitian perturbation of the whitened identity covariance."""

    matrix: np.ndarray
    node: int
    alpha: float

    @property
    def coefficient(self) -> float:
        return (1.0 + self.alpha) ** 2 - 1.0


def perturbation_matrix(
    impedance: np.ndarray, omega: np.ndarray, spec: EventSpec
) -> PerturbationMatrix:
    """Predicted covariance change for a stationary event at one bus.

    With d the whitened impedance column of the bus, the perturbation is
    ((1+alpha)^2 - 1) d d^*; the whitened post-event covariance is then
    the identity plus this matrix, so exactly one eigenvalue moves.
    """
    impedance = np.asarray(impedance)
    omega = np.asarray(omega)
    n = impedance.shape[0]
    if impedance.shape != (n, n) or omega.shape != (n, n):
        raise ValueError("impedance and covariance must be square and conformable")
    if spec.node > n:
        raise ValueError(f"event node {spec.node} outside network of {n} buses")
    root = inverse_sqrt_hermitian(omega)
    direction = root @ impedance[:, spec.node - 1]
    coeff = (1.0 + spec.alpha) ** 2 - 1.0
    matrix = coeff * np.outer(direction, direction.conj())
    return PerturbationMatrix(matrix=matrix, node=spec.node, alpha=spec.alpha)

"""Eigenvalue-spectrum statistics and verdicts for measurement windows.

A window is an N x T matrix of per-node measurements (rows = nodes,
columns = time samples).  After column standardization the sample
covariance of independent data obeys the Marchenko-Pastur law and the
singular-value-equivalent matrix obeys a ring law, so three scalar
criteria summarize where a window's spectrum sits relative to those
baselines:

  C_MPL1  largest eigenvalue over the upper Marchenko-Pastur edge,
  C_MPL2  fraction of eigenvalues outside the Marchenko-Pastur support,
  C_SRL   mean modulus of the ring-statistic eigenvalues.

A rank-one disturbance plants one covariance spike, which pushes C_MPL1
up and pulls C_SRL down; calibrated no-event intervals turn the criteria
into a detector, nearest-signature matching into a classifier, and a
matched filter over whitened impedance columns into a localizer.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import hermitian_part, inverse_sqrt_hermitian

__all__ = [
    "Calibration",
    "ClassSignature",
    "CriteriaTriple",
    "DegenerateColumnError",
    "DetectionReport",
    "StandardizedWindow",
    "covariance_spectrum",
    "criteria",
    "detect_and_classify",
    "localize",
    "mp_bounds",
    "ring_spectrum",
    "standardize",
    "whiten",
]

CRITERIA_KEYS = ("c_srl", "c_mpl1", "c_mpl2")


class DegenerateColumnError(ValueError):
    """A window column has zero spread and cannot be standardized."""


@dataclass(frozen=True)
class StandardizedWindow:
    """N x T measurement window scaled for random-matrix baselines.

    ``standardize`` produces windows whose columns have sample variance
    exactly 1/N; ``whiten`` produces windows where that holds only in
    expectation.  Requires T >= N >= 2 (aspect ratio c = N/T <= 1).
    """

    matrix: np.ndarray
    sigma_m: float = 0.0

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix)
        if m.ndim != 2:
            raise ValueError(f"expected an N x T matrix, got shape {m.shape}")
        n, t = m.shape
        if n < 2:
            raise ValueError(f"need at least 2 nodes, got {n}")
        if t < n:
            raise ValueError(f"need T >= N, got N={n}, T={t}")
        if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
            raise ValueError("window contains non-finite entries")
        if self.sigma_m < 0:
            raise ValueError(f"noise level must be >= 0, got {self.sigma_m}")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def t(self) -> int:
        return self.matrix.shape[1]

    @property
    def c(self) -> float:
        """Aspect ratio N/T."""
        return self.matrix.shape[0] / self.matrix.shape[1]


@dataclass(frozen=True)
class CriteriaTriple:
    """The three spectrum-position criteria for one window."""

    c_srl: float
    c_mpl1: float
    c_mpl2: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.c_srl) or self.c_srl < 0:
            raise ValueError(f"c_srl must be finite and >= 0, got {self.c_srl}")
        if not math.isfinite(self.c_mpl1) or self.c_mpl1 <= 0:
            raise ValueError(f"c_mpl1 must be finite and > 0, got {self.c_mpl1}")
        if not 0.0 <= self.c_mpl2 <= 1.0:
            raise ValueError(f"c_mpl2 must be in [0, 1], got {self.c_mpl2}")

    def as_dict(self) -> dict[str, float]:
        return {"c_srl": self.c_srl, "c_mpl1": self.c_mpl1, "c_mpl2": self.c_mpl2}


@dataclass(frozen=True)
class ClassSignature:
    """Median criteria fingerprint of one event class.

    C_MPL1 is stored in log10 because its dynamic range spans many
    decades; nearest-signature distances use (c_srl, log_c_mpl1, c_mpl2).
    """

    label: str
    c_srl: float
    log_c_mpl1: float
    c_mpl2: float


@dataclass(frozen=True, eq=False)
class Calibration:
    """No-event acceptance intervals plus per-class signatures.

    ``intervals`` maps each criterion to its open acceptance interval
    (lo, hi); a value on or outside a boundary is flagged.  ``sigma_scale``
    is the reference column scale and ``omega_ref`` the no-event window
    covariance, both used by the scenario pipeline; they are optional
    extensions of the persisted schema.
    """

    n: int
    t: int
    sigma_m: float
    seeds: tuple[int, ...]
    intervals: dict[str, tuple[float, float]]
    signatures: tuple[ClassSignature, ...] = ()
    sigma_scale: float | None = None
    omega_ref: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.n < 2 or self.t < self.n:
            raise ValueError(f"need T >= N >= 2, got N={self.n}, T={self.t}")
        missing = [k for k in CRITERIA_KEYS if k not in self.intervals]
        if missing:
            raise ValueError(f"calibration intervals missing {missing}")
        for key, (lo, hi) in self.intervals.items():
            if not lo <= hi:
                raise ValueError(f"interval for {key} has lo {lo} > hi {hi}")
        labels = [s.label for s in self.signatures]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate signature labels in {labels}")
        if self.omega_ref is not None:
            om = np.asarray(self.omega_ref)
            if om.shape != (self.n, self.n):
                raise ValueError(
                    f"omega_ref shape {om.shape} does not match N={self.n}"
                )
            object.__setattr__(self, "omega_ref", om)

    def to_json(self) -> str:
        doc: dict = {
            "N": self.n,
            "T": self.t,
            "sigma_m": self.sigma_m,
            "seeds": list(self.seeds),
            "intervals": {k: list(v) for k, v in sorted(self.intervals.items())},
            "signatures": [
                {
                    "label": s.label,
                    "c_srl": s.c_srl,
                    "log_c_mpl1": s.log_c_mpl1,
                    "c_mpl2": s.c_mpl2,
                }
                for s in self.signatures
            ],
        }
        if self.sigma_scale is not None:
            doc["sigma_scale"] = self.sigma_scale
        if self.omega_ref is not None:
            om = np.asarray(self.omega_ref)
            doc["omega_ref"] = {
                "re": np.real(om).tolist(),
                "im": np.imag(om).tolist(),
            }
        return json.dumps(doc, sort_keys=True, indent=1)

    @staticmethod
    def from_json(text: str) -> "Calibration":
        doc = json.loads(text)
        omega = None
        if "omega_ref" in doc:
            omega = np.array(doc["omega_ref"]["re"]) + 1j * np.array(
                doc["omega_ref"]["im"]
            )
        return Calibration(
            n=int(doc["N"]),
            t=int(doc["T"]),
            sigma_m=float(doc["sigma_m"]),
            seeds=tuple(int(s) for s in doc["seeds"]),
            intervals={k: (float(v[0]), float(v[1])) for k, v in doc["intervals"].items()},
            signatures=tuple(
                ClassSignature(
                    label=s["label"],
                    c_srl=float(s["c_srl"]),
                    log_c_mpl1=float(s["log_c_mpl1"]),
                    c_mpl2=float(s["c_mpl2"]),
                )
                for s in doc["signatures"]
            ),
            sigma_scale=float(doc["sigma_scale"]) if "sigma_scale" in doc else None,
            omega_ref=omega,
        )


@dataclass(frozen=True)
class DetectionReport:
    """Verdict for one window: criteria, flag, class label, localized node."""

    criteria: CriteriaTriple
    flag: bool
    label: str
    node: int | None
    thresholds: dict[str, tuple[float, float]]
    n: int
    t: int
    seed: int | None = None

    def __post_init__(self) -> None:
        if not self.flag and self.node is not None:
            raise ValueError("localized node must be null when no event is flagged")
        if not self.flag and self.label != "none":
            raise ValueError(f"unflagged report must carry label 'none', got {self.label!r}")


def standardize(
    raw: np.ndarray, sigma_m: float = 0.0, scale: float | None = None
) -> StandardizedWindow:
    """Center each column and scale it to sample variance 1/N.

    Each column (one snapshot across the N nodes) gets its mean removed
    and is divided by sqrt(N) times a standard deviation: the column's own
    sample deviation (ddof=1) by default, or the fixed reference ``scale``
    when given.  The fixed-scale variant keeps disturbance energy intact
    instead of letting an anomalous column renormalize itself away.
    """
    m = np.array(raw)
    if m.ndim != 2:
        raise ValueError(f"expected an N x T matrix, got shape {m.shape}")
    n, t = m.shape
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    if t < n:
        raise ValueError(f"need T >= N, got N={n}, T={t}")
    centered = m - m.mean(axis=0, keepdims=True)
    if scale is None:
        sd = np.std(centered, axis=0, ddof=1)
        bad = np.flatnonzero(sd == 0)
        if bad.size:
            raise DegenerateColumnError(
                f"column {int(bad[0])} is constant and cannot be standardized"
            )
    else:
        if not scale > 0:
            raise ValueError(f"reference scale must be > 0, got {scale}")
        sd = np.full(t, float(scale))
    return StandardizedWindow(centered / (math.sqrt(n) * sd), sigma_m=sigma_m)


def whiten(w: StandardizedWindow, omega_ref: np.ndarray) -> StandardizedWindow:
    """Decorrelate a window against a reference no-event covariance.

    Applies the pseudo inverse square root of ``omega_ref`` (directions
    with relative eigenvalue below 1e-10 are dropped; column
    standardization leaves one structurally dead direction) and rescales
    by 1/sqrt(N) so columns keep expected variance 1/N.  Output columns
    no longer have exactly variance 1/N; the covariance spectrum of a
    no-event window whitened this way concentrates on the
    Marchenko-Pastur bulk around 1.
    """
    omega = np.asarray(omega_ref)
    if omega.shape != (w.n, w.n):
        raise ValueError(f"omega_ref shape {omega.shape} does not match N={w.n}")
    isq = inverse_sqrt_hermitian(omega, drop_below=1e-10)
    return StandardizedWindow((isq @ w.matrix) / math.sqrt(w.n), sigma_m=w.sigma_m)


def mp_bounds(n: int, t: int) -> tuple[float, float]:
    """Marchenko-Pastur support edges (1 -+ sqrt(c))^2 for c = N/T."""
    if n < 1:
        raise ValueError(f"need N >= 1, got {n}")
    if t < n:
        raise ValueError(f"need T >= N, got N={n}, T={t}")
    root = math.sqrt(n / t)
    return ((1.0 - root) ** 2, (1.0 + root) ** 2)


def covariance_spectrum(w: StandardizedWindow) -> np.ndarray:
    """Descending eigenvalues of the sample covariance (N/T) * W W^H.

    The N/T factor undoes the 1/N column-variance convention so
    independent data lands on the Marchenko-Pastur support with unit
    variance.
    """
    m = w.matrix
    s = (w.n / w.t) * (m @ m.conj().T)
    vals = np.linalg.eigvalsh(hermitian_part(s))
    return vals[::-1].copy()


def ring_spectrum(w: StandardizedWindow) -> np.ndarray:
    """Complex eigenvalues of the row-standardized singular-value square.

    From the SVD W = U S Q^H, form the N x N matrix U S and standardize
    its rows (mean removed, divided by sqrt(N) times the row deviation):
    for independent data the eigenvalues fill an annulus of outer radius
    about 1, while a covariance spike concentrates energy in few rows and
    pulls eigenvalues toward the origin.  Rows with no spread (from dead
    whitened directions) are zeroed rather than amplified.
    """
    u, s, _ = np.linalg.svd(w.matrix, full_matrices=False)
    us = u[:, : w.n] * s[: w.n]
    mu = us.mean(axis=1, keepdims=True)
    sd = us.std(axis=1, ddof=1, keepdims=True)
    top = float(sd.max())
    if top == 0.0:
        return np.zeros(w.n, dtype=complex)
    live = sd > 1e-8 * top
    safe = np.where(live, sd, 1.0)
    z = np.where(live, (us - mu) / (math.sqrt(w.n) * safe), 0.0)
    return np.linalg.eigvals(z)


def criteria(w: StandardizedWindow) -> CriteriaTriple:
    """The three spectrum-position criteria of one window."""
    spectrum = covariance_spectrum(w)
    lo, hi = mp_bounds(w.n, w.t)
    c_mpl1 = float(spectrum[0] / hi)
    c_mpl2 = float(np.mean((spectrum < lo) | (spectrum > hi)))
    c_srl = float(np.mean(np.abs(ring_spectrum(w))))
    return CriteriaTriple(c_srl=c_srl, c_mpl1=c_mpl1, c_mpl2=c_mpl2)


def detect_and_classify(
    triple: CriteriaTriple, calibration: Calibration
) -> tuple[bool, str]:
    """Flag a window and name the nearest event class.

    A window is flagged when any criterion leaves the open acceptance
    interval (a value exactly on a boundary is flagged).  Flagged windows
    are labeled by the nearest signature in (c_srl, log10 c_mpl1, c_mpl2)
    space; distance ties pick the earliest signature in calibration
    order.  Unflagged windows are labeled "none".
    """
    if calibration is None:
        raise ValueError("detection requires a calibration")
    values = triple.as_dict()
    flag = False
    for key in CRITERIA_KEYS:
        lo, hi = calibration.intervals[key]
        if not lo < values[key] < hi:
            flag = True
            break
    if not flag:
        return False, "none"
    if not calibration.signatures:
        return True, "unknown"
    point = (triple.c_srl, math.log10(triple.c_mpl1), triple.c_mpl2)
    best_label = None
    best_dist = math.inf
    for sig in calibration.signatures:
        dist = math.hypot(
            point[0] - sig.c_srl,
            point[1] - sig.log_c_mpl1,
            point[2] - sig.c_mpl2,
        )
        if dist < best_dist:
            best_dist = dist
            best_label = sig.label
    return True, best_label


def localize(
    w: StandardizedWindow, omega_ref: np.ndarray, impedance: np.ndarray
) -> int:
    """Most likely disturbed node by matched filter over impedance columns.

    Whitens the window with the reference covariance, extracts the
    eigenvector of the largest-magnitude eigenvalue of the empirical
    whitened covariance minus the identity (the rank-one disturbance
    direction), and scores each candidate node k by its alignment with
    the whitened impedance column for k.  Returns the 1-based node id;
    score ties resolve to the lowest node id.  Call only on flagged
    windows.
    """
    omega = np.asarray(omega_ref)
    z = np.asarray(impedance)
    if omega.shape != (w.n, w.n):
        raise ValueError(f"omega_ref shape {omega.shape} does not match N={w.n}")
    if z.shape != (w.n, w.n):
        raise ValueError(f"impedance shape {z.shape} does not match N={w.n}")
    isq = inverse_sqrt_hermitian(omega, drop_below=1e-10)
    y = isq @ w.matrix
    dev = hermitian_part((y @ y.conj().T) / w.t - np.eye(w.n))
    vals, vecs = np.linalg.eigh(dev)
    lead = vecs[:, int(np.argmax(np.abs(vals)))]
    directions = isq @ z
    norms = np.linalg.norm(directions, axis=0)
    norms = np.where(norms == 0, 1.0, norms)
    scores = np.abs(lead.conj() @ directions) / norms
    return int(np.argmax(scores)) + 1

"""End-to-end scenario runner: ingestion, pipeline, calibration, sweeps.

A scenario is: build a radial network, draw correlated Gaussian loads,
solve the linear power flow per sample, add measurement noise, optionally
apply a single-bus event, and hand the resulting complex deviation
window to the spectrum detector.  Detection windows are scaled against a
calibrated reference column deviation rather than their own empirical
one: a window that renormalizes itself hides exactly the energy the
detector is looking for.  The per-node temporal mean is removed first,
standing in for the unknown operating point.

Everything is seed-deterministic: a (config, seed) pair reproduces
byte-identical reports, serial or parallel.
"""
from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .events import EVENT_CLASSES, EVENT_PRESETS, EventSpec, from_preset, impedance_matrix
from .linalg import hermitian_part
from .netmodel import (
    NetworkGraph,
    NetworkStructureError,
    chain_network,
    random_tree_network,
    star_network,
)
from .powerflow import linear_inverse_window
from .rmtdetect import (
    Calibration,
    ClassSignature,
    CriteriaTriple,
    DetectionReport,
    criteria,
    detect_and_classify,
    localize,
    mp_bounds,
    standardize,
    whiten,
)
from .stochastics import LoadModel, sample_loads

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "ScenarioError",
    "SweepRow",
    "SweepTable",
    "calibrate",
    "export_report",
    "export_spectrum",
    "load_network",
    "load_report",
    "parse_config",
    "parse_config_text",
    "read_spectrum",
    "run_scenario",
    "scenario_from_config",
    "simulate_window",
    "sweep",
    "whitened_spectrum",
]

DEFAULT_SCENARIOS: tuple[str, ...] = ("H0",) + EVENT_CLASSES

SPECTRUM_HEADER = "index,eigenvalue,mp_lower,mp_upper"


class ConfigError(ValueError):
    """A scenario configuration file or mapping is malformed."""


class ScenarioError(RuntimeError):
    """A scenario run failed; the message carries the scenario context."""


# ---------------------------------------------------------------------------
# Network file ingestion
# ---------------------------------------------------------------------------


def load_network(path: str | os.PathLike) -> NetworkGraph:
    """Parse an edge-list CSV into a validated radial network.

    Format: columns from,to,r,x in p.u.; an optional header row; comment
    lines start with '#'.  Node ids are relabeled densely (sorted by
    original id, reference 0 first) with the original ids kept as labels.
    Parse and validation errors name the offending line.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    rows: list[tuple[int, int, float, float]] = []
    seen: dict[tuple[int, int], int] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if [p.lower() for p in parts] == ["from", "to", "r", "x"]:
            continue
        if len(parts) != 4:
            raise NetworkStructureError(
                f"{path}: line {lineno}: expected 4 fields 'from,to,r,x', got {len(parts)}"
            )
        try:
            a, b = int(parts[0]), int(parts[1])
            r, x = float(parts[2]), float(parts[3])
        except ValueError as exc:
            raise NetworkStructureError(f"{path}: line {lineno}: {exc}") from exc
        if r <= 0:
            raise NetworkStructureError(
                f"{path}: line {lineno}: resistance must be > 0, got {r}"
            )
        if x < 0:
            raise NetworkStructureError(
                f"{path}: line {lineno}: reactance must be >= 0, got {x}"
            )
        key = (min(a, b), max(a, b))
        if key in seen:
            raise NetworkStructureError(
                f"{path}: line {lineno}: duplicate of line {seen[key]}: edge ({a}, {b})"
            )
        seen[key] = lineno
        rows.append((a, b, r, x))
    if not rows:
        raise NetworkStructureError(f"{path}: no edges found")
    ids = sorted({i for a, b, _, _ in rows for i in (a, b)})
    if ids[0] != 0:
        raise NetworkStructureError(f"{path}: missing reference node 0")
    dense = {orig: i for i, orig in enumerate(ids)}
    remapped = [(dense[a], dense[b], r, x) for a, b, r, x in rows]
    try:
        return NetworkGraph.from_edges(remapped, labels=[str(i) for i in ids])
    except (NetworkStructureError, ValueError) as exc:
        raise NetworkStructureError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


def parse_config_text(text: str) -> dict[str, str]:
    """Parse flat ``section.key = value`` lines into a mapping.

    Blank lines and '#' comments are skipped; duplicate or malformed
    keys are rejected with their line number.
    """
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def parse_config(path: str | os.PathLike) -> dict[str, str]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


_CONFIG_KEYS = {
    "seed",
    "scenario.name",
    "network.kind",
    "network.name",
    "network.nodes",
    "network.r",
    "network.x",
    "network.seed",
    "network.path",
    "load.mu_p",
    "load.mu_q",
    "load.sigma_p",
    "load.sigma_q",
    "load.rho",
    "rmt.T",
    "rmt.sigma_m",
    "event.preset",
    "event.node",
    "event.alpha",
    "event.duration",
    "event.onset",
    "event.route",
    "calibration.path",
    "calibration.runs",
    "calibration.signature_runs",
    "sweep.workers",
    "sweep.scenarios",
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything one run needs; immutable and cheap to re-seed.

    ``network_nodes`` counts buses including the reference, so a value
    of 31 gives a 30-bus detection problem.  ``event_duration`` is a
    fraction of the window; ``event_label`` "H0" means no event.
    """

    seed: int
    t: int = 500
    sigma_m: float = 1e-3
    network_kind: str = "chain"
    network_nodes: int = 31
    network_r: float = 0.01
    network_x: float = 0.02
    network_seed: int | None = None
    network_path: str | None = None
    network_name: str | None = None
    mu_p: float = -0.04
    mu_q: float = -0.016
    sigma_p: float = 2e-3
    sigma_q: float = 8e-4
    rho_pq: float = 0.5
    event_label: str = "H0"
    event_node: int | None = None
    event_alpha: float | None = None
    event_duration: float | None = None
    event_onset: int | None = None
    event_route: str = "current"
    calibration_path: str | None = None
    calibration_runs: int = 200
    signature_runs: int = 20
    sweep_workers: int | None = None
    sweep_scenarios: tuple[str, ...] = DEFAULT_SCENARIOS
    name: str | None = None

    def __post_init__(self) -> None:
        if self.t < 2:
            raise ConfigError(f"rmt.T must be >= 2, got {self.t}")
        if self.sigma_m < 0:
            raise ConfigError(f"rmt.sigma_m must be >= 0, got {self.sigma_m}")
        if self.network_kind not in ("chain", "star", "random", "file"):
            raise ConfigError(
                f"network.kind must be chain|star|random|file, got {self.network_kind!r}"
            )
        if self.network_kind == "file":
            if not self.network_path:
                raise ConfigError("network.kind = file requires network.path")
        elif self.network_nodes < 3:
            raise ConfigError(
                f"network.nodes must be >= 3 (reference plus two buses), got {self.network_nodes}"
            )
        if self.network_kind == "random" and self.network_seed is None:
            raise ConfigError("network.kind = random requires network.seed")
        if self.event_route not in ("current", "voltage"):
            raise ConfigError(
                f"event.route must be current|voltage, got {self.event_route!r}"
            )
        valid_labels = ("H0", "CUSTOM") + EVENT_CLASSES
        if self.event_label not in valid_labels:
            raise ConfigError(
                f"event.preset must be one of {valid_labels}, got {self.event_label!r}"
            )
        if self.event_label == "CUSTOM" and self.event_alpha is None:
            raise ConfigError("event.preset = CUSTOM requires event.alpha")
        if self.event_duration is not None and not 0 < self.event_duration <= 1:
            raise ConfigError(
                f"event.duration is a window fraction in (0, 1], got {self.event_duration}"
            )
        if self.calibration_runs < 2:
            raise ConfigError("calibration.runs must be >= 2")
        if self.signature_runs < 1:
            raise ConfigError("calibration.signature_runs must be >= 1")

    @property
    def label(self) -> str:
        return self.name if self.name is not None else self.event_label

    @property
    def network_label(self) -> str:
        if self.network_name:
            return self.network_name
        if self.network_kind == "file":
            stem = os.path.basename(self.network_path or "")
            return os.path.splitext(stem)[0] or "file"
        return f"{self.network_kind}{self.network_nodes - 1}"

    def replace(self, **overrides) -> "ScenarioConfig":
        return dataclasses.replace(self, **overrides)

    def build_network(self) -> NetworkGraph:
        if self.network_kind == "file":
            return load_network(self.network_path)
        if self.network_kind == "chain":
            return chain_network(self.network_nodes, self.network_r, self.network_x)
        if self.network_kind == "star":
            return star_network(self.network_nodes, self.network_r, self.network_x)
        return random_tree_network(
            self.network_nodes, np.random.default_rng(self.network_seed)
        )

    def build_load(self, n: int) -> LoadModel:
        return LoadModel.uniform(
            n,
            mu_p=self.mu_p,
            mu_q=self.mu_q,
            sigma_p=self.sigma_p,
            sigma_q=self.sigma_q,
            rho_pq=self.rho_pq,
        )

    def build_event(self, n: int) -> EventSpec | None:
        if self.event_label == "H0":
            return None
        node = self.event_node if self.event_node is not None else (n + 1) // 2
        if not 1 <= node <= n:
            raise ConfigError(f"event.node {node} outside 1..{n}")
        if self.event_label == "CUSTOM":
            duration = (
                max(1, round(self.event_duration * self.t))
                if self.event_duration is not None
                else None
            )
            if self.event_onset is not None:
                onset = self.event_onset
            elif duration is not None:
                onset = self.t - duration
            else:
                onset = 0
            return EventSpec(
                node=node,
                alpha=self.event_alpha,
                label="CUSTOM",
                onset=onset,
                duration=duration,
            )
        if self.event_duration is not None:
            duration = max(1, round(self.event_duration * self.t))
            onset = (
                self.event_onset if self.event_onset is not None else self.t - duration
            )
            return EventSpec(
                node=node,
                alpha=EVENT_PRESETS[self.event_label].alpha,
                label=self.event_label,
                onset=onset,
                duration=duration,
            )
        return from_preset(self.event_label, node, self.t, onset=self.event_onset)


def _coerce(key: str, value: str, kind: type):
    try:
        if kind is int:
            return int(value)
        if kind is float:
            return float(value)
        return value
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: expected {kind.__name__}, got {value!r}") from exc


def scenario_from_config(source: dict[str, str] | str | os.PathLike) -> ScenarioConfig:
    """Build a ScenarioConfig from a parsed mapping or a config file path.

    A seed key is mandatory: runs never draw implicit entropy.  Unknown
    keys are rejected to catch typos.
    """
    mapping = dict(source) if isinstance(source, dict) else parse_config(source)
    unknown = sorted(set(mapping) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if "seed" not in mapping:
        raise ConfigError("config must set an explicit seed")

    def get(key, kind, default=None):
        if key not in mapping:
            return default
        return _coerce(key, mapping[key], kind)

    scenarios = DEFAULT_SCENARIOS
    if "sweep.scenarios" in mapping:
        scenarios = tuple(
            s.strip() for s in mapping["sweep.scenarios"].split(",") if s.strip()
        )
    cfg = ScenarioConfig(
        seed=get("seed", int),
        t=get("rmt.T", int, 500),
        sigma_m=get("rmt.sigma_m", float, 1e-3),
        network_kind=get("network.kind", str, "chain"),
        network_nodes=get("network.nodes", int, 31),
        network_r=get("network.r", float, 0.01),
        network_x=get("network.x", float, 0.02),
        network_seed=get("network.seed", int),
        network_path=get("network.path", str),
        network_name=get("network.name", str),
        mu_p=get("load.mu_p", float, -0.04),
        mu_q=get("load.mu_q", float, -0.016),
        sigma_p=get("load.sigma_p", float, 2e-3),
        sigma_q=get("load.sigma_q", float, 8e-4),
        rho_pq=get("load.rho", float, 0.5),
        event_label=get("event.preset", str, "H0"),
        event_node=get("event.node", int),
        event_alpha=get("event.alpha", float),
        event_duration=get("event.duration", float),
        event_onset=get("event.onset", int),
        event_route=get("event.route", str, "current"),
        calibration_path=get("calibration.path", str),
        calibration_runs=get("calibration.runs", int, 200),
        signature_runs=get("calibration.signature_runs", int, 20),
        sweep_workers=get("sweep.workers", int),
        sweep_scenarios=scenarios,
        name=get("scenario.name", str),
    )
    if cfg.network_kind == "file" and not os.path.exists(cfg.network_path):
        raise ConfigError(f"network.path does not exist: {cfg.network_path}")
    return cfg


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


def simulate_window(
    cfg: ScenarioConfig,
    graph: NetworkGraph | None = None,
    impedance: np.ndarray | None = None,
) -> np.ndarray:
    """Simulate the row-centered complex deviation window for one scenario.

    Loads are drawn from the seeded generator, voltages solved in one
    vectorized pass, complex measurement noise of total deviation
    sigma_m added, and the event (if any) applied by the configured
    route.  Both routes express the same left-multiplication of the
    window and agree to numerical precision:

      current: reconstruct bus currents Z^-1 u, scale the event row,
               map back through Z;
      voltage: apply Z (I + alpha e_k e_k^T) Z^-1 to the event span.
    """
    graph = cfg.build_network() if graph is None else graph
    n = graph.n
    if cfg.t < n:
        raise ValueError(f"window length T={cfg.t} below network size N={n}")
    model = cfg.build_load(n)
    rng = np.random.default_rng(cfg.seed)
    p_ser, q_ser = sample_loads(model, cfg.t, rng)
    v, theta = linear_inverse_window(graph, p_ser.values, q_ser.values)
    u = v + 1j * theta
    noise = (cfg.sigma_m / math.sqrt(2.0)) * (
        rng.standard_normal((n, cfg.t)) + 1j * rng.standard_normal((n, cfg.t))
    )
    u = u + noise
    event = cfg.build_event(n)
    if event is not None:
        z = impedance_matrix(graph) if impedance is None else impedance
        start, stop = event.span(cfg.t)
        k = event.node - 1
        if cfg.event_route == "current":
            current = np.linalg.solve(z, u)
            current[k, start:stop] *= 1.0 + event.alpha
            u = z @ current
        else:
            gain = np.eye(n, dtype=complex)
            gain[k, k] += event.alpha
            u = u.copy()
            u[:, start:stop] = z @ (gain @ np.linalg.solve(z, u[:, start:stop]))
    return u - u.mean(axis=1, keepdims=True)


def _require_pipeline_calibration(calibration: Calibration) -> None:
    if calibration is None:
        raise ValueError("run_scenario needs a calibration (run calibrate first)")
    if calibration.sigma_scale is None or calibration.omega_ref is None:
        raise ValueError(
            "calibration lacks sigma_scale/omega_ref; regenerate it with calibrate()"
        )


def run_scenario(
    cfg: ScenarioConfig,
    calibration: Calibration | None = None,
    graph: NetworkGraph | None = None,
) -> DetectionReport:
    """Run one scenario end to end and return its detection report.

    The window is scaled by the calibrated reference column deviation,
    whitened against the calibrated no-event covariance, and summarized
    by the three criteria; flagged windows are classified by nearest
    signature and localized by matched filter.  Failures re-raise as
    ScenarioError with the scenario label attached.
    """
    if calibration is None and cfg.calibration_path:
        with open(cfg.calibration_path, "r", encoding="utf-8") as fh:
            calibration = Calibration.from_json(fh.read())
    try:
        _require_pipeline_calibration(calibration)
        graph = cfg.build_network() if graph is None else graph
        if calibration.n != graph.n or calibration.t != cfg.t:
            raise ValueError(
                f"calibration is for N={calibration.n}, T={calibration.t}; "
                f"scenario has N={graph.n}, T={cfg.t}"
            )
        z = impedance_matrix(graph)
        u = simulate_window(cfg, graph=graph, impedance=z)
        window = standardize(u, cfg.sigma_m, scale=calibration.sigma_scale)
        triple = criteria(whiten(window, calibration.omega_ref))
        flag, label = detect_and_classify(triple, calibration)
        node = localize(window, calibration.omega_ref, z) if flag else None
        return DetectionReport(
            criteria=triple,
            flag=flag,
            label=label,
            node=node,
            thresholds=dict(calibration.intervals),
            n=graph.n,
            t=cfg.t,
            seed=cfg.seed,
        )
    except ScenarioError:
        raise
    except Exception as exc:
        raise ScenarioError(f"scenario {cfg.label!r} (seed {cfg.seed}): {exc}") from exc


def whitened_spectrum(
    cfg: ScenarioConfig, calibration: Calibration
) -> tuple[np.ndarray, tuple[float, float]]:
    """Covariance spectrum the detector sees, with its M-P bounds."""
    _require_pipeline_calibration(calibration)
    graph = cfg.build_network()
    from .rmtdetect import covariance_spectrum

    u = simulate_window(cfg, graph=graph)
    window = standardize(u, cfg.sigma_m, scale=calibration.sigma_scale)
    spectrum = covariance_spectrum(whiten(window, calibration.omega_ref))
    return spectrum, mp_bounds(graph.n, cfg.t)


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------


def _h0_seed(cfg: ScenarioConfig, i: int) -> int:
    return cfg.seed + i


def _signature_seed(cfg: ScenarioConfig, class_index: int, i: int) -> int:
    return cfg.seed + 100_000 * (class_index + 1) + i


def calibrate(cfg: ScenarioConfig) -> Calibration:
    """Derive no-event intervals, class signatures and pipeline references.

    Three deterministic passes over ``cfg.calibration_runs`` seeded
    no-event runs: a reference column deviation (median of per-column
    sample deviations), the no-event covariance of reference-scaled
    windows, then the criteria population whose widened observed range
    becomes the open acceptance intervals.  Class signatures are median
    criteria over ``cfg.signature_runs`` runs per preset, at the same
    geometry.
    """
    h0 = cfg.replace(event_label="H0", event_node=None, event_alpha=None)
    graph = h0.build_network()
    n = graph.n
    if h0.t < n:
        raise ValueError(f"window length T={h0.t} below network size N={n}")
    runs = h0.calibration_runs
    seeds = [_h0_seed(h0, i) for i in range(runs)]

    scale_probe = min(runs, 40)
    medians = []
    for s in seeds[:scale_probe]:
        u = simulate_window(h0.replace(seed=s), graph=graph)
        centered = u - u.mean(axis=0, keepdims=True)
        medians.append(float(np.median(np.std(centered, axis=0, ddof=1))))
    sigma_scale = float(np.median(medians))
    if sigma_scale <= 0:
        raise ValueError("calibration found zero column deviation; check the load model")

    acc = np.zeros((n, n), dtype=complex)
    for s in seeds:
        w = standardize(
            simulate_window(h0.replace(seed=s), graph=graph),
            h0.sigma_m,
            scale=sigma_scale,
        )
        acc += (w.matrix @ w.matrix.conj().T) / h0.t
    omega_ref = hermitian_part(acc / runs)

    triples = []
    for s in seeds:
        w = standardize(
            simulate_window(h0.replace(seed=s), graph=graph),
            h0.sigma_m,
            scale=sigma_scale,
        )
        triples.append(criteria(whiten(w, omega_ref)))
    intervals: dict[str, tuple[float, float]] = {}
    for key in ("c_srl", "c_mpl1", "c_mpl2"):
        values = np.array([getattr(tr, key) for tr in triples])
        lo = float(values.min())
        hi = float(values.max())
        # The observed range is roughly the 0.5% tails at 200 runs; the
        # 25% widening plus one eigenvalue of slack on the discrete
        # outlier fraction keeps the false-flag rate safely under 1%.
        pad = 0.25 * (hi - lo) + 1e-9
        if key == "c_mpl2":
            pad += 1.0 / n
        intervals[key] = (lo - pad, hi + pad)

    z = impedance_matrix(graph)
    signatures = []
    for class_index, label in enumerate(EVENT_CLASSES):
        rows = {"c_srl": [], "c_mpl1": [], "c_mpl2": []}
        for i in range(cfg.signature_runs):
            run_cfg = h0.replace(
                seed=_signature_seed(h0, class_index, i), event_label=label
            )
            u = simulate_window(run_cfg, graph=graph, impedance=z)
            w = standardize(u, h0.sigma_m, scale=sigma_scale)
            tr = criteria(whiten(w, omega_ref))
            rows["c_srl"].append(tr.c_srl)
            rows["c_mpl1"].append(tr.c_mpl1)
            rows["c_mpl2"].append(tr.c_mpl2)
        signatures.append(
            ClassSignature(
                label=label,
                c_srl=float(np.median(rows["c_srl"])),
                log_c_mpl1=float(np.log10(np.median(rows["c_mpl1"]))),
                c_mpl2=float(np.median(rows["c_mpl2"])),
            )
        )

    return Calibration(
        n=n,
        t=h0.t,
        sigma_m=h0.sigma_m,
        seeds=tuple(seeds),
        intervals=intervals,
        signatures=tuple(signatures),
        sigma_scale=sigma_scale,
        omega_ref=omega_ref,
    )


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    """One (network, scenario) cell: a report or a recorded failure."""

    network: str
    scenario: str
    report: DetectionReport | None
    error: str | None = None


@dataclass(frozen=True)
class SweepTable:
    """Deterministically ordered sweep results, one row per scenario run."""

    rows: tuple[SweepRow, ...]

    def to_json(self) -> str:
        return json.dumps(
            {"rows": [_sweep_row_dict(r) for r in self.rows]}, sort_keys=True, indent=1
        )

    @staticmethod
    def from_json(text: str) -> "SweepTable":
        doc = json.loads(text)
        rows = []
        for rd in doc["rows"]:
            report = None
            if rd.get("report") is not None:
                report = _report_from_dict(rd["report"])
            rows.append(
                SweepRow(
                    network=rd["network"],
                    scenario=rd["scenario"],
                    report=report,
                    error=rd.get("error"),
                )
            )
        return SweepTable(rows=tuple(rows))

    def to_csv(self) -> str:
        """Criteria rows by scenario columns, one block of rows per network.

        Failed cells show ERR; the JSON form keeps the error text.
        """
        networks: list[str] = []
        scenarios: list[str] = []
        cells: dict[tuple[str, str], SweepRow] = {}
        for row in self.rows:
            if row.network not in networks:
                networks.append(row.network)
            if row.scenario not in scenarios:
                scenarios.append(row.scenario)
            cells[(row.network, row.scenario)] = row
        lines = ["network,criterion," + ",".join(scenarios)]
        for net in networks:
            for key in ("c_srl", "c_mpl1", "c_mpl2", "flag"):
                out = [net, key]
                for sc in scenarios:
                    row = cells.get((net, sc))
                    if row is None or row.report is None:
                        out.append("ERR" if row is not None else "")
                    elif key == "flag":
                        out.append(str(row.report.flag).lower())
                    else:
                        out.append(format(getattr(row.report.criteria, key), ".10g"))
                lines.append(",".join(out))
        return "\n".join(lines) + "\n"


def sweep(
    cfgs: list[ScenarioConfig],
    calibration: Calibration,
    workers: int | None = None,
) -> SweepTable:
    """Run many scenarios into one table; order follows the input list.

    Per-scenario failures are recorded in their row and do not stop the
    sweep.  ``workers`` > 1 runs scenarios in a thread pool; results are
    merged in input order, so parallel and serial sweeps are identical.
    """

    def one(cfg: ScenarioConfig) -> SweepRow:
        try:
            report = run_scenario(cfg, calibration)
            return SweepRow(cfg.network_label, cfg.label, report)
        except Exception as exc:
            return SweepRow(cfg.network_label, cfg.label, None, error=str(exc))

    if workers is not None and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(one, cfgs))
    else:
        rows = [one(cfg) for cfg in cfgs]
    return SweepTable(rows=tuple(rows))


def preset_sweep_configs(cfg: ScenarioConfig) -> list[ScenarioConfig]:
    """The configured scenario list (default: H0 plus every preset)."""
    out = []
    for label in cfg.sweep_scenarios:
        out.append(cfg.replace(event_label=label, name=label))
    return out


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------


def _report_dict(report: DetectionReport) -> dict:
    return {
        "criteria": {
            "c_srl": report.criteria.c_srl,
            "c_mpl1": report.criteria.c_mpl1,
            "c_mpl2": report.criteria.c_mpl2,
        },
        "flag": report.flag,
        "class": report.label,
        "node": report.node,
        "n": report.n,
        "t": report.t,
        "seed": report.seed,
        "thresholds": {k: list(v) for k, v in sorted(report.thresholds.items())},
    }


def _report_from_dict(doc: dict) -> DetectionReport:
    return DetectionReport(
        criteria=CriteriaTriple(
            c_srl=float(doc["criteria"]["c_srl"]),
            c_mpl1=float(doc["criteria"]["c_mpl1"]),
            c_mpl2=float(doc["criteria"]["c_mpl2"]),
        ),
        flag=bool(doc["flag"]),
        label=doc["class"],
        node=None if doc["node"] is None else int(doc["node"]),
        thresholds={k: (float(v[0]), float(v[1])) for k, v in doc["thresholds"].items()},
        n=int(doc["n"]),
        t=int(doc["t"]),
        seed=None if doc.get("seed") is None else int(doc["seed"]),
    )


def _sweep_row_dict(row: SweepRow) -> dict:
    return {
        "network": row.network,
        "scenario": row.scenario,
        "report": None if row.report is None else _report_dict(row.report),
        "error": row.error,
    }


def _report_csv(report: DetectionReport) -> str:
    header = "c_srl,c_mpl1,c_mpl2,flag,class,node,n,t,seed"
    node = "" if report.node is None else str(report.node)
    seed = "" if report.seed is None else str(report.seed)
    line = (
        f"{report.criteria.c_srl:.10g},{report.criteria.c_mpl1:.10g},"
        f"{report.criteria.c_mpl2:.10g},{str(report.flag).lower()},"
        f"{report.label},{node},{report.n},{report.t},{seed}"
    )
    return header + "\n" + line + "\n"


def export_report(
    obj: DetectionReport | SweepTable, fmt: str, path: str | os.PathLike
) -> None:
    """Write a report or sweep table as canonical JSON or CSV.

    JSON output is byte-stable (sorted keys, fixed layout) so identical
    runs produce identical files.
    """
    if fmt not in ("json", "csv"):
        raise ValueError(f"format must be json or csv, got {fmt!r}")
    if isinstance(obj, DetectionReport):
        text = (
            json.dumps(_report_dict(obj), sort_keys=True, indent=1) + "\n"
            if fmt == "json"
            else _report_csv(obj)
        )
    elif isinstance(obj, SweepTable):
        text = obj.to_json() + "\n" if fmt == "json" else obj.to_csv()
    else:
        raise TypeError(f"cannot export object of type {type(obj).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def load_report(path: str | os.PathLike) -> DetectionReport:
    """Re-read a JSON detection report written by export_report."""
    with open(path, "r", encoding="utf-8") as fh:
        return _report_from_dict(json.load(fh))


def export_spectrum(
    path: str | os.PathLike, spectrum: np.ndarray, bounds: tuple[float, float]
) -> None:
    """Write eigenvalues with their M-P bounds as plot-ready CSV."""
    lo, hi = bounds
    lines = [SPECTRUM_HEADER]
    for i, value in enumerate(np.asarray(spectrum)):
        lines.append(f"{i},{value:.17g},{lo:.17g},{hi:.17g}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_spectrum(
    path: str | os.PathLike,
) -> tuple[np.ndarray, tuple[float, float]]:
    """Read back a spectrum CSV; returns (eigenvalues, (mp_lower, mp_upper))."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines or lines[0] != SPECTRUM_HEADER:
        raise ValueError(f"{path}: expected header {SPECTRUM_HEADER!r}")
    values, lo, hi = [], None, None
    for ln in lines[1:]:
        _, value, low, high = ln.split(",")
        values.append(float(value))
        lo, hi = float(low), float(high)
    if lo is None:
        raise ValueError(f"{path}: no spectrum rows")
    return np.array(values), (lo, hi)

"""Exact complex injection model and its small-deviation linearization.

The linear model works in deviations from the reference operating point
(1 p.u. magnitude, zero phase at the substation).  Forward maps voltage
deviations to injections through conductance/susceptance Laplacians;
inverse solves the two resistance/reactance Laplacian systems.  On a
radial network the pair is an exact inverse of itself, and the gap to the
exact injection equations shrinks quadratically with the deviation scale.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .netmodel import NetworkGraph, reduced_laplacian


@dataclass(frozen=True)
class VoltageState:
    """Per-node magnitude and phase deviations, reference node excluded."""

    v: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))
        object.__setattr__(self, "theta", np.asarray(self.theta, dtype=float))
        if self.v.shape != self.theta.shape or self.v.ndim != 1:
            raise ValueError("v and theta must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(self.v)) and np.all(np.isfinite(self.theta))):
            raise ValueError("voltage state entries must be finite")


@dataclass(frozen=True)
class PowerInjection:
    """Per-node active/reactive injections in p.u., reference node excluded."""

    p: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        if self.p.shape != self.q.shape or self.p.ndim != 1:
            raise ValueError("p and q must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(self.p)) and np.all(np.isfinite(self.q))):
            raise ValueError("injection entries must be finite")


def exact_injection(graph: NetworkGraph, voltages: np.ndarray) -> np.ndarray:
    """Complex power injected at every node for given complex voltages.

    ``voltages`` has one entry per node including the reference.  Each
    node's injection sums V_a (V_a - V_b)^* / z_ab^* over its neighbors.
    """
    voltages = np.asarray(voltages, dtype=complex)
    if voltages.shape != (graph.n_nodes,):
        raise ValueError(
            f"expected {graph.n_nodes} complex voltages, got {voltages.shape}"
        )
    if np.any(np.abs(voltages) == 0):
        raise ValueError("all voltage magnitudes must be nonzero")
    powers = np.zeros(graph.n_nodes, dtype=complex)
    for e in graph.edges:
        if e.z == 0:
            raise ValueError(f"zero impedance on edge ({e.a}, {e.b})")
        z_conj = np.conj(e.z)
        powers[e.a] += voltages[e.a] * np.conj(voltages[e.a] - voltages[e.b]) / z_conj
        powers[e.b] += voltages[e.b] * np.conj(voltages[e.b] - voltages[e.a]) / z_conj
    return powers


def linear_forward(graph: NetworkGraph, state: VoltageState) -> PowerInjection:
    """Injections produced by voltage deviations under the linear model."""
    if state.v.shape != (graph.n,):
        raise ValueError(f"state dimension {state.v.shape} != network size {graph.n}")
    h_g = reduced_laplacian(graph, "g")
    h_b = reduced_laplacian(graph, "beta")
    p = h_g @ state.v + h_b @ state.theta
    q = h_b @ state.v - h_g @ state.theta
    return PowerInjection(p=p, q=q)


def linear_inverse(graph: NetworkGraph, injection: PowerInjection) -> VoltageState:
    """Voltage deviations driven by injections under the linear model.

    Solves the reduced resistance- and reactance-weighted Laplacian
    systems; outputs are deviations from the 1 p.u. / zero-phase
    reference.
    """
    if injection.p.shape != (graph.n,):
        raise ValueError(
            f"injection dimension {injection.p.shape} != network size {graph.n}"
        )
    h_r = reduced_laplacian(graph, "1/r")
    h_x = reduced_laplacian(graph, "1/x")
    sol_r = np.linalg.solve(h_r, np.column_stack([injection.p, injection.q]))
    sol_x = np.linalg.solve(h_x, np.column_stack([injection.p, injection.q]))
    v = sol_r[:, 0] + sol_x[:, 1]
    theta = sol_x[:, 0] - sol_r[:, 1]
    return VoltageState(v=v, theta=theta)


def linear_inverse_window(
    graph: NetworkGraph, p: np.ndarray, q: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized linear_inverse over an N x T block of injections.

    Returns (v, theta) as N x T arrays; one pair of Laplacian solves
    covers every sample.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape or p.ndim != 2 or p.shape[0] != graph.n:
        raise ValueError(
            f"expected matching {graph.n} x T injection blocks, got {p.shape} and {q.shape}"
        )
    h_r = reduced_laplacian(graph, "1/r")
    h_x = reduced_laplacian(graph, "1/x")
    sol_r_p = np.linalg.solve(h_r, p)
    sol_r_q = np.linalg.solve(h_r, q)
    sol_x_p = np.linalg.solve(h_x, p)
    sol_x_q = np.linalg.solve(h_x, q)
    return sol_r_p + sol_x_q, sol_x_p - sol_r_q


def linearization_residual(
    graph: NetworkGraph, injection: PowerInjection, eps: float
) -> float:
    """Max per-node gap between the exact equations and the linear model.

    Scales the injection by ``eps``, reconstructs full complex voltages
    from the linear solution and evaluates the exact injection model; the
    returned maximum deviation shrinks as eps^2.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if eps == 0:
        return 0.0
    scaled = PowerInjection(p=eps * injection.p, q=eps * injection.q)
    state = linear_inverse(graph, scaled)
    voltages = np.empty(graph.n_nodes, dtype=complex)
    voltages[0] = 1.0
    voltages[1:] = (1.0 + state.v) * np.exp(1j * state.theta)
    exact = exact_injection(graph, voltages)
    target = scaled.p + 1j * scaled.q
    return float(np.max(np.abs(exact[1:] - target)))

"""Network dynamics: nodal voltage solves and implicit-Euler time stepping.

At every instant the node voltages satisfy Kirchhoff's current law at the
internal nodes while external nodes sit at their drive voltages and grounded
nodes at 0 V. The element resistances advance by an implicit Euler step,

    R' = clamp(R + dt * f(V(R'))),

resolved by fixed-point iteration: the nodal system is re-solved with the
candidate resistances until the update is stationary. The per-link voltage
convention follows the link direction (V = V_from - V_to).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Dict, Mapping

import numpy as np

from .elements import rate_profile
from .network import Network, NetworkValidationError, NodeRole, validate
from .signals import Signal, evaluate


DriveAssignment = Dict[int, Signal]  # external node id -> drive signal


class ConvergenceError(Exception):
    """Fixed-point iteration failed to reach tolerance within the budget."""

    def __init__(self, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"fixed-point iteration did not converge: residual {residual:.3e} "
            f"after {iterations} iterations"
        )


class SingularSystemError(Exception):
    """The internal-node conductance matrix is singular."""


class SimulationStepError(Exception):
    """A time step failed; carries the failing step index."""

    def __init__(self, step: int, time: float, cause: Exception):
        self.step = step
        self.time = time
        super().__init__(f"step {step} (t = {time:.9g} s) failed: {cause}")


class DriveError(ValueError):
    """Drive assignment does not match the network's external nodes."""


@dataclass(frozen=True)
class SimulationConfig:
    """Time-stepping parameters.

    dt: step size in seconds. n_steps: number of steps (the trace holds
    n_steps + 1 samples including t = 0). fp_tolerance: relative resistance
    change at which the fixed-point iteration stops. kcl_tolerance /
    kcl_current_floor: acceptance threshold for relative KCL residuals and
    the absolute current scale (amps) below which they are not meaningful.
    """

    dt: float
    n_steps: int
    fp_tolerance: float = 1e-9
    fp_max_iterations: int = 100
    kcl_tolerance: float = 1e-8
    kcl_current_floor: float = 1e-12

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if not self.fp_tolerance > 0.0:
            raise ValueError("fp_tolerance must be positive")
        if self.fp_max_iterations < 1:
            raise ValueError("fp_max_iterations must be >= 1")


@dataclass(frozen=True)
class NetworkState:
    """Snapshot at one instant: arrays follow network declaration order."""

    t: float
    resistances: np.ndarray  # (n_links,)
    node_voltages: np.ndarray  # (n_nodes,)


class _Assembled:
    """Index arrays for fast conductance-matrix assembly, built once per
    network and reused across steps."""

    def __init__(self, network: Network):
        self.network = network
        node_ids = network.node_ids
        self.node_ids = node_ids
        self.index = {nid: k for k, nid in enumerate(node_ids)}
        n = len(node_ids)
        roles = [role for _, role in network.nodes]
        self.external_idx = np.array(
            [k for k, r in enumerate(roles) if r is NodeRole.EXTERNAL], dtype=int
        )
        self.internal_idx = np.array(
            [k for k, r in enumerate(roles) if r is NodeRole.INTERNAL], dtype=int
        )
        self.n_nodes = n
        self.n_internal = len(self.internal_idx)

        links = network.links
        self.n_links = len(links)
        self.from_idx = np.array([self.index[l.from_node] for l in links], dtype=int)
        self.to_idx = np.array([self.index[l.to_node] for l in links], dtype=int)
        self.alpha = np.array([l.params.alpha for l in links])
        self.beta = np.array([l.params.beta for l in links])
        self.v_t = np.array([l.params.v_threshold for l in links])
        self.r_min = np.array([l.params.r_min for l in links])
        self.r_max = np.array([l.params.r_max for l in links])
        self.r_init = np.array([l.params.r_init for l in links])

        # position of each node in the reduced internal system, -1 if fixed
        pos = -np.ones(n, dtype=int)
        pos[self.internal_idx] = np.arange(self.n_internal)
        self.internal_pos = pos

        f_pos = pos[self.from_idx]
        t_pos = pos[self.to_idx]
        f_int = f_pos >= 0
        t_int = t_pos >= 0
        link_no = np.arange(self.n_links)

        # diagonal: every link adds its conductance at each internal endpoint
        self.diag_pos = np.concatenate([f_pos[f_int], t_pos[t_int]])
        self.diag_link = np.concatenate([link_no[f_int], link_no[t_int]])
        # off-diagonal: links joining two internal nodes
        both = f_int & t_int
        self.pair_i = f_pos[both]
        self.pair_j = t_pos[both]
        self.pair_link = link_no[both]
        # right-hand side: links joining an internal node to a fixed one
        fi = f_int & ~t_int
        self.rhs_pos_f = f_pos[fi]
        self.rhs_node_f = self.to_idx[fi]
        self.rhs_link_f = link_no[fi]
        ti = t_int & ~f_int
        self.rhs_pos_t = t_pos[ti]
        self.rhs_node_t = self.from_idx[ti]
        self.rhs_link_t = link_no[ti]

    def solve(self, resistances: np.ndarray, fixed_voltages: np.ndarray) -> np.ndarray:
        """Node voltage vector given per-link resistances and a full-length
        vector whose entries at fixed nodes hold the boundary voltages."""
        voltages = fixed_voltages.copy()
        if self.n_internal == 0:
            return voltages
        g = 1.0 / resistances
        a = np.zeros((self.n_internal, self.n_internal))
        np.add.at(a, (self.diag_pos, self.diag_pos), g[self.diag_link])
        minus_g = -g[self.pair_link]
        np.add.at(a, (self.pair_i, self.pair_j), minus_g)
        np.add.at(a, (self.pair_j, self.pair_i), minus_g)
        b = np.zeros(self.n_internal)
        np.add.at(b, self.rhs_pos_f, g[self.rhs_link_f] * fixed_voltages[self.rhs_node_f])
        np.add.at(b, self.rhs_pos_t, g[self.rhs_link_t] * fixed_voltages[self.rhs_node_t])
        try:
            internal = np.linalg.solve(a, b)
        except np.linalg.LinAlgError:
            raise SingularSystemError(
                "internal-node conductance matrix is singular "
                "(internal node with no path to a fixed-voltage node?)"
            ) from None
        voltages[self.internal_idx] = internal
        return voltages

    def boundary(self, drives: Mapping[int, Signal], t: float) -> np.ndarray:
        """Full-length voltage vector with drives evaluated at t; grounded
        and internal entries are 0 (internal entries get overwritten)."""
        fixed = np.zeros(self.n_nodes)
        for nid, signal in drives.items():
            fixed[self.index[nid]] = evaluate(signal, t)
        return fixed


@functools.lru_cache(maxsize=16)
def _assemble(network: Network) -> _Assembled:
    return _Assembled(network)


def check_drives(network: Network, drives: Mapping[int, Signal]) -> None:
    """Every external node needs exactly one drive; nothing else may have one."""
    external = set(network.external_nodes)
    for nid in external:
        if nid not in drives:
            raise DriveError(f"missing drive for external node {nid}")
    for nid in drives:
        if nid not in external:
            raise DriveError(f"drive assigned to non-external node {nid}")
    for nid, signal in drives.items():
        if not isinstance(signal, Signal):
            raise DriveError(f"drive for node {nid} is not a Signal: {signal!r}")


def solve_node_voltages(
    network: Network,
    resistances,
    boundary: Mapping[int, float],
) -> dict:
    """Solve KCL for the internal node voltages.

    resistances: per-link values in declaration order. boundary: volts for
    every external and grounded node by id. Returns {internal node id: volts}.
    """
    asm = _assemble(network)
    fixed = np.zeros(asm.n_nodes)
    for nid in network.external_nodes + network.grounded_nodes:
        if nid not in boundary:
            raise ValueError(f"boundary voltage missing for fixed node {nid}")
        fixed[asm.index[nid]] = boundary[nid]
    r = np.asarray(resistances, dtype=float)
    if r.shape != (asm.n_links,):
        raise ValueError(
            f"expected {asm.n_links} resistances, got shape {r.shape}"
        )
    voltages = asm.solve(r, fixed)
    return {nid: float(voltages[asm.index[nid]]) for nid in network.internal_nodes}


def _step(asm: _Assembled, t: float, resistances: np.ndarray,
          drives: Mapping[int, Signal], config: SimulationConfig):
    """One implicit-Euler step from t to t + dt.

    Returns (new resistances, new node voltages, iterations used). The
    fixed-point iterate starts at the current resistances; convergence is
    the max relative resistance change between sweeps. A final solve makes
    the recorded voltages consistent with the accepted resistances.
    """
    t_new = t + config.dt
    fixed = asm.boundary(drives, t_new)
    r_old = resistances
    r_iter = resistances.copy()
    residual = np.inf
    for iteration in range(1, config.fp_max_iterations + 1):
        voltages = asm.solve(r_iter, fixed)
        v_m = voltages[asm.from_idx] - voltages[asm.to_idx]
        r_cand = np.clip(
            r_old + config.dt * rate_profile(asm.alpha, asm.beta, asm.v_t, v_m),
            asm.r_min,
            asm.r_max,
        )
        residual = float(np.max(np.abs(r_cand - r_iter) / r_iter))
        r_iter = r_cand
        if residual <= config.fp_tolerance:
            break
    else:
        raise ConvergenceError(residual, config.fp_max_iterations)
    voltages = asm.solve(r_iter, fixed)
    return r_iter, voltages, iteration


def step_implicit_euler(
    network: Network,
    state: NetworkState,
    drives: Mapping[int, Signal],
    config: SimulationConfig,
) -> NetworkState:
    """Advance one step; see _step for the scheme."""
    asm = _assemble(network)
    r = np.asarray(state.resistances, dtype=float)
    new_r, new_v, _ = _step(asm, state.t, r, drives, config)
    return NetworkState(t=state.t + config.dt, resistances=new_r, node_voltages=new_v)


def initial_state(network: Network, drives: Mapping[int, Signal]) -> NetworkState:
    """Consistent state at t = 0: initial resistances, voltages solved."""
    asm = _assemble(network)
    r0 = asm.r_init.copy()
    v0 = asm.solve(r0, asm.boundary(drives, 0.0))
    return NetworkState(t=0.0, resistances=r0, node_voltages=v0)


@dataclass(frozen=True)
class SimulationTrace:
    """Recorded time series. Rows are samples (n_steps + 1 of them, t = 0
    first); node columns follow network declaration order, link columns the
    link declaration order. Per-link voltage is V_from - V_to and current
    flows along the link direction."""

    times: np.ndarray  # (T,)
    node_ids: tuple
    link_names: tuple
    node_voltages: np.ndarray  # (T, n_nodes)
    resistances: np.ndarray  # (T, n_links)
    link_voltages: np.ndarray  # (T, n_links)
    currents: np.ndarray  # (T, n_links)
    dt: float

    @property
    def n_samples(self) -> int:
        return len(self.times)

    def voltage_of(self, node_id: int) -> np.ndarray:
        return self.node_voltages[:, self.node_ids.index(node_id)]

    def to_csv(self) -> str:
        """Delimited export; float formatting is fixed-width scientific with
        17 significant digits so repeated runs are byte-identical and values
        round-trip exactly."""
        header = ["t"]
        header += [f"V_node_{nid}" for nid in self.node_ids]
        header += [f"R_link_{k}" for k in range(1, len(self.link_names) + 1)]
        header += [f"I_link_{k}" for k in range(1, len(self.link_names) + 1)]
        header += [f"VM_link_{k}" for k in range(1, len(self.link_names) + 1)]
        rows = [",".join(header)]
        block = np.hstack(
            [
                self.times[:, None],
                self.node_voltages,
                self.resistances,
                self.currents,
                self.link_voltages,
            ]
        )
        for row in block:
            rows.append(",".join(format(v, ".16e") for v in row))
        return "\n".join(rows) + "\n"

    def to_document(self) -> dict:
        """Structured export mirroring the same arrays (JSON-ready)."""
        return {
            "dt": self.dt,
            "times": self.times.tolist(),
            "nodes": [
                {"id": nid, "voltages": self.node_voltages[:, k].tolist()}
                for k, nid in enumerate(self.node_ids)
            ],
            "links": [
                {
                    "index": k + 1,
                    "name": name,
                    "resistances": self.resistances[:, k].tolist(),
                    "currents": self.currents[:, k].tolist(),
                    "voltages": self.link_voltages[:, k].tolist(),
                }
                for k, name in enumerate(self.link_names)
            ],
        }


def simulate(
    network: Network,
    drives: Mapping[int, Signal],
    config: SimulationConfig,
) -> SimulationTrace:
    """Run the full time stepping and record everything.

    Validates the network and the drive assignment first. Step failures
    (non-convergence, singular systems) are re-raised as SimulationStepError
    with the failing step index.
    """
    violations = validate(network)
    if violations:
        raise NetworkValidationError(violations)
    check_drives(network, drives)

    asm = _assemble(network)
    n_samples = config.n_steps + 1
    times = np.arange(n_samples) * config.dt
    volts = np.empty((n_samples, asm.n_nodes))
    res = np.empty((n_samples, asm.n_links))

    state0 = initial_state(network, drives)
    volts[0] = state0.node_voltages
    res[0] = state0.resistances

    r = state0.resistances
    for k in range(1, n_samples):
        t_prev = times[k - 1]
        try:
            r, v, _ = _step(asm, t_prev, r, drives, config)
        except (ConvergenceError, SingularSystemError) as exc:
            raise SimulationStepError(k, t_prev + config.dt, exc) from exc
        volts[k] = v
        res[k] = r

    v_m = volts[:, asm.from_idx] - volts[:, asm.to_idx]
    currents = v_m / res
    return SimulationTrace(
        times=times,
        node_ids=network.node_ids,
        link_names=tuple(f"{l.from_node}->{l.to_node}" for l in network.links),
        node_voltages=volts,
        resistances=res,
        link_voltages=v_m,
        currents=currents,
        dt=config.dt,
    )


def kcl_residuals(network: Network, trace: SimulationTrace) -> np.ndarray:
    """Relative KCL residual per sample and internal node, shape
    (n_samples, n_internal): |net current in| / max(sum |incident currents|,
    floor). The floor (1e-12 A) keeps idle nodes from tripping on noise."""
    asm = _assemble(network)
    floor = 1e-12
    t_len = trace.n_samples
    net_in = np.zeros((t_len, asm.n_nodes))
    sum_abs = np.zeros((t_len, asm.n_nodes))
    cur = trace.currents
    for k in range(asm.n_links):
        net_in[:, asm.to_idx[k]] += cur[:, k]
        net_in[:, asm.from_idx[k]] -= cur[:, k]
        sum_abs[:, asm.to_idx[k]] += np.abs(cur[:, k])
        sum_abs[:, asm.from_idx[k]] += np.abs(cur[:, k])
    internal = asm.internal_idx
    scale = np.maximum(sum_abs[:, internal], floor)
    return np.abs(net_in[:, internal]) / scale


def source_balance(network: Network, trace: SimulationTrace):
    """Total current injected by external nodes and drained by grounded
    nodes, per sample. Conservation makes the two equal up to solver
    round-off whenever KCL holds at the internal nodes."""
    asm = _assemble(network)
    t_len = trace.n_samples
    net_in = np.zeros((t_len, asm.n_nodes))
    cur = trace.currents
    for k in range(asm.n_links):
        net_in[:, asm.to_idx[k]] += cur[:, k]
        net_in[:, asm.from_idx[k]] -= cur[:, k]
    grounded = [asm.index[nid] for nid in network.grounded_nodes]
    external = [asm.index[nid] for nid in network.external_nodes]
    injected = -net_in[:, external].sum(axis=1)
    drained = net_in[:, grounded].sum(axis=1)
    return injected, drained

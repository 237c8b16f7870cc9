"""Kuramoto vector field, energy, and fixed-step RK4 integration.

The vector field is theta_j' = sum_{k in N(j)} sin(theta_k - theta_j). It is
the negative gradient of E = sum over edges of (1 - cos(theta_u - theta_v)).

All functions accept either a single configuration (shape (n,)) or a stack
of configurations (shape (m, n)).
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
import pandas as pd
from numpy.typing import ArrayLike, NDArray

from kuramoto_tori.defaults import (
    DEFAULT_DT,
    DEFAULT_T_END,
    MONOTONE_SLACK,
    STOP_RESIDUAL,
)
from kuramoto_tori.errors import DimensionMismatch, IntegrationError
from kuramoto_tori.graphs import Graph
from kuramoto_tori.phasecfg import reduce

logger = logging.getLogger(__name__)

Direction = Literal["forward", "reversed"]


def _phases(g: Graph, c: ArrayLike) -> NDArray[np.float64]:
    theta = np.asarray(c, dtype=np.float64)
    if theta.ndim not in (1, 2) or theta.shape[-1] != g.n:
        raise DimensionMismatch(f"configuration shape {theta.shape} does not match n={g.n}")
    return theta


def _edge_differences(g: Graph, theta: NDArray[np.float64]) -> NDArray[np.float64]:
    # theta_dst - theta_src for every edge
    return np.asarray(theta[..., g.dst] - theta[..., g.src])


def rhs(g: Graph, c: ArrayLike) -> NDArray[np.float64]:
    """Right-hand side of the Kuramoto system.

    Raises:
        DimensionMismatch: If the configuration length is not g.n.
    """
    theta = _phases(g, c)
    return np.asarray(np.sin(_edge_differences(g, theta)) @ g.incidence.T)


def energy(g: Graph, c: ArrayLike) -> NDArray[np.float64] | float:
    """Sum over edges of 1 - cos(theta_u - theta_v), each edge once."""
    theta = _phases(g, c)
    e = np.sum(1.0 - np.cos(_edge_differences(g, theta)), axis=-1)
    return float(e) if theta.ndim == 1 else np.asarray(e)


def energy_gradient(g: Graph, c: ArrayLike) -> NDArray[np.float64]:
    """Analytic gradient of the energy, accumulated edge by edge.

    dE/dtheta_u = sin(theta_u - theta_v) summed over the edges at u.
    """
    theta = _phases(g, c)
    s = np.sin(_edge_differences(g, theta))
    grad_t = np.zeros(theta.T.shape)
    np.add.at(grad_t, g.src, -s.T)
    np.add.at(grad_t, g.dst, s.T)
    return np.asarray(grad_t.T)


def residual(g: Graph, c: ArrayLike) -> NDArray[np.float64] | float:
    """Max-norm of rhs; per row for a stack of configurations."""
    r = np.max(np.abs(rhs(g, c)), axis=-1)
    return float(r) if np.ndim(r) == 0 else np.asarray(r)


def _sign(direction: Direction) -> float:
    if direction == "forward":
        return 1.0
    if direction == "reversed":
        return -1.0
    raise ValueError(f"direction must be 'forward' or 'reversed', got '{direction}'")


def _check_step(dt: float, t_end: float) -> int:
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if not t_end > 0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    return max(1, int(math.ceil(t_end / dt - 1e-9)))


def _step_at(step: int, n_steps: int, dt: float, t_end: float) -> float:
    # The last step is shortened so runs end exactly at t_end
    return dt if step < n_steps else t_end - (n_steps - 1) * dt


def rk4_step(
    g: Graph,
    y: NDArray[np.float64],
    dt: float,
    sign: float,
    k1: Optional[NDArray[np.float64]] = None,
) -> NDArray[np.float64]:
    """One classical RK4 step of sign * rhs, reduced mod 2*pi.

    Args:
        k1: First stage if already evaluated at y.
    """
    if k1 is None:
        k1 = sign * rhs(g, y)
    k2 = sign * rhs(g, y + 0.5 * dt * k1)
    k3 = sign * rhs(g, y + 0.5 * dt * k2)
    k4 = sign * rhs(g, y + dt * k3)
    y_next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(y_next)):
        raise IntegrationError("non-finite state during RK4 step")
    return reduce(y_next)


# ============================================================================
# Single Trajectory
# ============================================================================


@dataclass
class TrajectoryRecord:
    """Recorded trajectory.

    Attributes:
        times: Increasing sample times.
        states: (len(times), n) array of configurations.
        energies: Energy at each sample.
        direction: Time direction the trajectory was integrated in.
        dt: Step size used.
    """

    times: NDArray[np.float64]
    states: NDArray[np.float64]
    energies: NDArray[np.float64]
    direction: Direction = "forward"
    dt: float = DEFAULT_DT

    def __post_init__(self) -> None:
        """Validate lengths and step."""
        if not (len(self.times) == len(self.states) == len(self.energies)):
            raise ValueError(
                f"length mismatch: {len(self.times)} times, {len(self.states)} states, "
                f"{len(self.energies)} energies"
            )
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    @property
    def final_state(self) -> NDArray[np.float64]:
        """Last recorded configuration."""
        return np.asarray(self.states[-1])

    @property
    def final_time(self) -> float:
        """Last recorded time."""
        return float(self.times[-1])

    def is_energy_monotone(self, slack: float = MONOTONE_SLACK) -> bool:
        """Non-increasing energy (forward) or non-decreasing (reversed), within slack per step."""
        steps = np.diff(self.energies)
        if self.direction == "forward":
            return bool(np.all(steps <= slack))
        return bool(np.all(steps >= -slack))

    def to_frame(self) -> pd.DataFrame:
        """Table with columns t, theta_0..theta_{n-1}, E."""
        n = self.states.shape[1]
        df = pd.DataFrame(self.states, columns=[f"theta_{j}" for j in range(n)])
        df.insert(0, "t", self.times)
        df["E"] = self.energies
        return df


def integrate(
    g: Graph,
    c0: ArrayLike,
    dt: float = DEFAULT_DT,
    t_end: float = DEFAULT_T_END,
    direction: Direction = "forward",
    stop_residual: Optional[float] = None,
    record_every: int = 1,
) -> TrajectoryRecord:
    """Integrate the Kuramoto system with fixed-step RK4.

    Reversed runs stop once the energy exceeds 2 * |E(G)|, the largest value
    the energy can take.

    Args:
        g: Graph.
        c0: Initial configuration.
        dt: Step size (> 0). The last step is shortened when dt does not
            divide t_end, so the run ends exactly at t_end.
        t_end: Horizon (> 0).
        direction: "forward" integrates rhs, "reversed" integrates -rhs.
        stop_residual: Stop early once max |rhs| drops below this value.
        record_every: Keep every k-th step (the last step is always kept).

    Raises:
        IntegrationError: If the state becomes non-finite.
        DimensionMismatch: If c0 does not match g.
    """
    n_steps = _check_step(dt, t_end)
    sign = _sign(direction)
    if record_every < 1:
        raise ValueError(f"record_every must be >= 1, got {record_every}")

    y = reduce(_phases(g, c0))
    if y.ndim != 1:
        raise DimensionMismatch("integrate takes a single configuration; use integrate_batch")
    ceiling = 2.0 * g.edge_count

    times = [0.0]
    states = [y.copy()]
    energies = [float(energy(g, y))]

    t = 0.0
    for step in range(1, n_steps + 1):
        k1 = sign * rhs(g, y)
        if stop_residual is not None and float(np.max(np.abs(k1))) < stop_residual:
            logger.debug(f"Trajectory settled at t={t:.4g}")
            break
        h = _step_at(step, n_steps, dt, t_end)
        y = rk4_step(g, y, h, sign, k1)
        t = step * dt if step < n_steps else t_end
        e = float(energy(g, y))
        if step % record_every == 0 or step == n_steps:
            times.append(t)
            states.append(y.copy())
            energies.append(e)
        if direction == "reversed" and e > ceiling:
            logger.warning(f"Reversed trajectory passed the energy ceiling {ceiling} at t={t}")
            break

    if times[-1] != t:
        times.append(t)
        states.append(y.copy())
        energies.append(float(energy(g, y)))

    return TrajectoryRecord(
        times=np.asarray(times),
        states=np.asarray(states),
        energies=np.asarray(energies),
        direction=direction,
        dt=dt,
    )


# ============================================================================
# Batched Trajectories
# ============================================================================


@dataclass
class BatchResult:
    """Outcome of integrating a stack of initial conditions.

    Attributes:
        final_states: (m, n) end configurations.
        stop_times: Time at which each row stopped.
        converged: Row reached max |rhs| < stop_residual.
        monotone: Energy moved in the direction of time within the slack at every step.
        start_energies: Energy of each initial condition.
        final_energies: Energy of each end configuration.
    """

    final_states: NDArray[np.float64]
    stop_times: NDArray[np.float64]
    converged: NDArray[np.bool_]
    monotone: NDArray[np.bool_]
    start_energies: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))
    final_energies: NDArray[np.float64] = field(default_factory=lambda: np.zeros(0))

    def __len__(self) -> int:
        return int(self.final_states.shape[0])


def integrate_batch(
    g: Graph,
    starts: ArrayLike,
    dt: float = DEFAULT_DT,
    t_end: float = DEFAULT_T_END,
    direction: Direction = "forward",
    stop_residual: float = STOP_RESIDUAL,
    slack: float = MONOTONE_SLACK,
) -> BatchResult:
    """RK4 on many initial conditions at once.

    Rows are frozen as soon as their residual drops below stop_residual, so
    each row follows exactly the trajectory integrate would produce for it.

    Raises:
        IntegrationError: If any state becomes non-finite.
    """
    n_steps = _check_step(dt, t_end)
    sign = _sign(direction)

    y = reduce(np.atleast_2d(_phases(g, starts))).copy()
    m = y.shape[0]
    active = np.ones(m, dtype=bool)
    converged = np.zeros(m, dtype=bool)
    monotone = np.ones(m, dtype=bool)
    stop_times = np.zeros(m)
    start_energies = np.atleast_1d(np.asarray(energy(g, y), dtype=np.float64))
    e_prev = start_energies.copy()
    ceiling = 2.0 * g.edge_count

    for step in range(1, n_steps + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break

        ya = y[idx]
        k1 = sign * rhs(g, ya)
        settled = np.max(np.abs(k1), axis=-1) < stop_residual
        if np.any(settled):
            converged[idx[settled]] = True
            active[idx[settled]] = False
            idx, ya, k1 = idx[~settled], ya[~settled], k1[~settled]
            if idx.size == 0:
                break

        y_next = rk4_step(g, ya, _step_at(step, n_steps, dt, t_end), sign, k1)
        e_next = np.atleast_1d(np.asarray(energy(g, y_next), dtype=np.float64))
        if direction == "forward":
            bad = e_next > e_prev[idx] + slack
        else:
            bad = e_next < e_prev[idx] - slack
        monotone[idx[bad]] = False

        y[idx] = y_next
        e_prev[idx] = e_next
        stop_times[idx] = step * dt if step < n_steps else t_end
        if direction == "reversed":
            active[idx[e_next > ceiling]] = False

    still = np.flatnonzero(active)
    if still.size:
        converged[still] = np.atleast_1d(residual(g, y[still])) < stop_residual

    logger.debug(
        f"Batch of {m} {direction} trajectories: {int(converged.sum())} settled, "
        f"{int((~monotone).sum())} non-monotone"
    )
    return BatchResult(
        final_states=y,
        stop_times=stop_times,
        converged=converged,
        monotone=monotone,
        start_energies=start_energies,
        final_energies=e_prev,
    )

"""Sensing-constrained LQG: Riccati weights, Kalman covariances, sensor objective.

Time convention: the filter starts from Sigma_{0|0} = x0_cov, measurements
arrive at t = 1..T, the control u_t = -K_t xhat_{t|t} drives x_{t+1}, and the
stage cost at step t is x_{t+1}' Q x_{t+1} + u_t' R u_t. Under this
convention the expected cost splits into a sensor-independent part plus
sum_t trace(M_t Sigma_{t|t}).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractError, InputError
from .setfn import SetFunction

PSD_TOL = 1e-8
SCENARIO_Q = np.diag([1e-3, 1e-3, 10.0, 1e-3, 1e-3, 10.0])
SCENARIO_R = np.eye(3)


def _sym(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + np.swapaxes(m, -1, -2))


def psd_project(m: np.ndarray) -> np.ndarray:
    """Symmetrize; clip negative eigenvalues only when they exceed round-off."""
    m = _sym(m)
    w, v = np.linalg.eigh(m)
    if w.min() >= -1e-10:
        return m
    return (v * np.clip(w, 0.0, None)) @ v.T


def _check_psd(m: np.ndarray, what: str, definite: bool = False):
    if not np.allclose(m, m.T, atol=1e-10):
        raise InputError(f"{what} must be symmetric")
    lo = np.linalg.eigvalsh(m).min() if m.size else 0.0
    if lo < (1e-12 if definite else -1e-10):
        raise InputError(f"{what} must be positive {'definite' if definite else 'semi-definite'}")


@dataclass(frozen=True, eq=False)
class LinearSystem:
    A: np.ndarray
    B: np.ndarray
    W: np.ndarray
    x0_mean: np.ndarray
    x0_cov: np.ndarray
    T: int

    def __post_init__(self):
        d = self.A.shape[0]
        if self.A.shape != (d, d) or self.B.shape[0] != d or self.W.shape != (d, d):
            raise InputError("inconsistent system dimensions")
        if self.x0_mean.shape != (d,) or self.x0_cov.shape != (d, d):
            raise InputError("inconsistent initial-state dimensions")
        if self.T < 1:
            raise InputError("horizon must be >= 1")
        _check_psd(self.W, "W")
        _check_psd(self.x0_cov, "x0_cov")

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]


@dataclass(frozen=True, eq=False)
class SensorModel:
    id: int
    C: np.ndarray
    V: np.ndarray
    name: str = ""

    def __post_init__(self):
        if self.C.ndim != 2 or self.V.shape != (self.C.shape[0],) * 2:
            raise InputError(f"sensor {self.id}: C and V shapes disagree")
        _check_psd(self.V, f"sensor {self.id} noise covariance", definite=True)

    @property
    def information(self) -> np.ndarray:
        return self.C.T @ np.linalg.solve(self.V, self.C)


@dataclass(eq=False)
class LqgWeights:
    Q: np.ndarray
    R: np.ndarray
    S: list[np.ndarray] = field(default_factory=list)  # S[t] for t = 1..T+1 (index 0 unused)
    K: list[np.ndarray] = field(default_factory=list)  # K[t] for t = 1..T
    M: list[np.ndarray] = field(default_factory=list)  # M[t] for t = 1..T


def riccati_backward(sys: LinearSystem, Q, R) -> LqgWeights:
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    R = np.atleast_2d(np.asarray(R, dtype=float))
    _check_psd(Q, "Q")
    _check_psd(R, "R", definite=True)
    A, B, T = sys.A, sys.B, sys.T
    S = [None] * (T + 2)
    K = [None] * (T + 1)
    M = [None] * (T + 1)
    S[T + 1] = Q.copy()
    for t in range(T, 0, -1):
        Sn = S[t + 1]
        gam = R + B.T @ Sn @ B
        K[t] = np.linalg.solve(gam, B.T @ Sn @ A)
        M[t] = psd_project(K[t].T @ gam @ K[t])
        S[t] = psd_project(Q + A.T @ Sn @ A - A.T @ Sn @ B @ K[t])
    for t in range(1, T + 1):
        if np.linalg.eigvalsh(M[t]).min() < -PSD_TOL:
            raise ContractError(f"M_{t} is not PSD")
    return LqgWeights(Q, R, S, K, M)


def _stack(sensors: Sequence[SensorModel]) -> tuple[np.ndarray, np.ndarray]:
    C = np.vstack([s.C for s in sensors])
    V = np.zeros((C.shape[0], C.shape[0]))
    r = 0
    for s in sensors:
        k = s.C.shape[0]
        V[r : r + k, r : r + k] = s.V
        r += k
    return C, V


def kalman_covariance(sys: LinearSystem, sensors: Iterable[SensorModel], T: int | None = None) -> list[np.ndarray]:
    """Posterior covariances Sigma_{t|t}, t = 1..T, via the information form."""
    sensors = list(sensors)
    T = sys.T if T is None else T
    info = sum((s.information for s in sensors), np.zeros((sys.d, sys.d)))
    P = sys.x0_cov
    out = []
    for _ in range(T):
        P = _sym(sys.A @ P @ sys.A.T + sys.W)
        if sensors:
            if np.linalg.eigvalsh(P).min() > 1e-12 * max(1.0, np.abs(P).max()):
                P = psd_project(np.linalg.inv(np.linalg.inv(P) + info))
            else:
                # singular prior: the information form is undefined
                P = _gain_update(P, *_stack(sensors))
        out.append(P)
    return out


def _gain_update(P, C, V):
    G = P @ C.T @ np.linalg.inv(C @ P @ C.T + V)
    I_GC = np.eye(P.shape[0]) - G @ C
    return _sym(I_GC @ P @ I_GC.T + G @ V @ G.T)


def kalman_covariance_gain_form(sys: LinearSystem, sensors: Iterable[SensorModel], T: int | None = None):
    """Same recursion through the Kalman gain; kept as a cross-check."""
    sensors = list(sensors)
    T = sys.T if T is None else T
    P = sys.x0_cov
    out = []
    for _ in range(T):
        P = _sym(sys.A @ P @ sys.A.T + sys.W)
        if sensors:
            P = _gain_update(P, *_stack(sensors))
        out.append(P)
    return out


def sensing_cost(weights: LqgWeights, covs: Sequence[np.ndarray]) -> float:
    return float(sum(np.trace(weights.M[t + 1] @ P) for t, P in enumerate(covs)))


class SensorObjective:
    """Sum_t trace(M_t Sigma_{t|t}(S)) with a batched path over many subsets."""

    def __init__(self, sys: LinearSystem, weights: LqgWeights, catalog: Sequence[SensorModel]):
        self.sys = sys
        self.weights = weights
        self.catalog = list(catalog)
        self._info = np.array([s.information for s in self.catalog])
        self._Ms = np.array(weights.M[1 : sys.T + 1])
        self._table: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.catalog)

    def cost(self, s: Iterable[int]) -> float:
        s = sorted(s)
        if self._table is not None:
            return float(self._table[sum(1 << i for i in s)])
        return sensing_cost(self.weights, kalman_covariance(self.sys, [self.catalog[i] for i in s]))

    def cost_batch(self, masks: np.ndarray) -> np.ndarray:
        """Costs for subsets given as bitmasks, all propagated together."""
        masks = np.asarray(masks, dtype=np.int64)
        try:
            return self._cost_batch(masks)
        except np.linalg.LinAlgError:
            return np.array([self.cost([i for i in range(self.n) if m >> i & 1]) for m in masks.tolist()])

    def _cost_batch(self, masks: np.ndarray) -> np.ndarray:
        d = self.sys.d
        info = np.zeros((len(masks), d, d))
        for i in range(self.n):
            sel = (masks >> i) & 1 == 1
            info[sel] += self._info[i]
        has = masks != 0
        A, W = self.sys.A, self.sys.W
        P = np.broadcast_to(self.sys.x0_cov, (len(masks), d, d)).copy()
        total = np.zeros(len(masks))
        for t in range(self.sys.T):
            P = _sym(A @ P @ A.T + W)
            if has.any():
                P[has] = _sym(np.linalg.inv(np.linalg.inv(P[has]) + info[has]))
            total += np.einsum("ij,kji->k", self._Ms[t], P)
        return total

    def precompute(self) -> np.ndarray:
        """Tabulate the cost of every subset of the catalog (2^n entries)."""
        if self._table is None:
            self._table = self.cost_batch(np.arange(1 << self.n))
        return self._table

    def set_function(self) -> SetFunction:
        """Reward form J(empty) - J(S): normalized, non-negative, non-decreasing."""
        return SetFunction(self.n, lambda s: -self.cost(s), monotone=True, submodular=None, name="lqg-sensing")


def sensor_selection_objective(sys: LinearSystem, weights: LqgWeights, catalog: Sequence[SensorModel]) -> SetFunction:
    return SensorObjective(sys, weights, catalog).set_function()


# closed loop --------------------------------------------------------------


@dataclass(eq=False)
class NoiseBank:
    """Pre-drawn randomness shared by every sensor set (common random numbers)."""

    x0: np.ndarray  # (rollouts, d) initial states
    w: np.ndarray  # (rollouts, T + 1, d); w[:, t] drives x_{t+1}
    v: list[np.ndarray]  # per sensor (rollouts, T, k_i); v[i][:, t - 1] corrupts y_t


def draw_noise(sys: LinearSystem, catalog: Sequence[SensorModel], rollouts: int, seed) -> NoiseBank:
    """One independent stream per rollout, derived from (seed, rollout index)."""
    if rollouts < 1:
        raise InputError("rollouts must be >= 1")
    d, T = sys.d, sys.T
    Lx, Lw = _sqrtm(sys.x0_cov), _sqrtm(sys.W)
    Lv = [_sqrtm(s.V) for s in catalog]
    x0 = np.empty((rollouts, d))
    w = np.empty((rollouts, T + 1, d))
    v = [np.empty((rollouts, T, s.C.shape[0])) for s in catalog]
    for r, ss in enumerate(np.random.SeedSequence(seed).spawn(rollouts)):
        rng = np.random.default_rng(ss)
        x0[r] = sys.x0_mean + Lx @ rng.standard_normal(d)
        w[r] = rng.standard_normal((T + 1, d)) @ Lw.T
        for i, s in enumerate(catalog):
            v[i][r] = rng.standard_normal((T, s.C.shape[0])) @ Lv[i].T
    return NoiseBank(x0, w, v)


def _sqrtm(m: np.ndarray) -> np.ndarray:
    # tolerates singular covariances (zero noise)
    w, U = np.linalg.eigh(_sym(m))
    return U * np.sqrt(np.clip(w, 0.0, None))


def rollout_costs(
    sys: LinearSystem, weights: LqgWeights, catalog: Sequence[SensorModel], selected: Iterable[int], noise: NoiseBank
) -> np.ndarray:
    """Per-rollout LQG cost for one sensor subset, all rollouts at once."""
    sel = sorted(selected)
    sensors = [catalog[i] for i in sel]
    covs = kalman_covariance(sys, sensors)
    if sensors:
        C, V = _stack(sensors)
        CtVinv = C.T @ np.linalg.inv(V)
    A, B, Q, R = sys.A, sys.B, weights.Q, weights.R
    x = noise.x0 @ A.T + noise.w[:, 0]
    xhat = np.broadcast_to(sys.x0_mean @ A.T, x.shape).copy()
    cost = np.zeros(len(x))
    for t in range(1, sys.T + 1):
        if sensors:
            y = x @ C.T + np.concatenate([noise.v[i][:, t - 1] for i in sel], axis=1)
            gain = covs[t - 1] @ CtVinv
            xhat = xhat + (y - xhat @ C.T) @ gain.T
        u = -xhat @ weights.K[t].T
        x = x @ A.T + u @ B.T + noise.w[:, t]
        xhat = xhat @ A.T + u @ B.T
        cost += np.einsum("ri,ij,rj->r", x, Q, x) + np.einsum("ri,ij,rj->r", u, R, u)
    return cost


def simulate_closed_loop_cost(
    sys: LinearSystem,
    weights: LqgWeights,
    catalog: Sequence[SensorModel],
    selected: Iterable[int],
    rollouts: int = 100,
    seed=0,
    noise: NoiseBank | None = None,
) -> float:
    """Monte Carlo mean of the LQG cost; deterministic given ``seed``."""
    if noise is None:
        noise = draw_noise(sys, catalog, rollouts, seed)
    return float(rollout_costs(sys, weights, catalog, selected, noise).mean())


def expected_closed_loop_cost(
    sys: LinearSystem, weights: LqgWeights, catalog: Sequence[SensorModel], selected: Iterable[int]
) -> float:
    """Closed-form expectation of the simulated cost (used to check the simulator)."""
    S, Q = weights.S, weights.Q
    mu1 = sys.A @ sys.x0_mean
    P1 = sys.A @ sys.x0_cov @ sys.A.T + sys.W
    D = S[1] - Q
    const = mu1 @ D @ mu1 + np.trace(D @ P1)
    const += sum(np.trace(S[t + 1] @ sys.W) for t in range(1, sys.T + 1))
    covs = kalman_covariance(sys, [catalog[i] for i in sorted(selected)])
    return float(const + sensing_cost(weights, covs))


# vehicle scenario------------------------------------------------------------


@dataclass(frozen=True)
class ScenarioConfig:
    seed: int = 0
    T: int = 20
    dt: float = 1.0
    n_ground: int = 12
    init_box: float = 10.0

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        known = {k: d[k] for k in ("seed", "T", "dt", "n_ground", "init_box") if k in d}
        return cls(**known)


def double_integrator(dt: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    I3, Z3 = np.eye(3), np.zeros((3, 3))
    A = np.block([[I3, dt * I3], [Z3, I3]])
    B = np.vstack([0.5 * dt * dt * I3, dt * I3])
    return A, B


def build_vehicle_scenario(seed=0, config: ScenarioConfig | None = None) -> tuple[LinearSystem, list[SensorModel]]:
    """UAV landing: 6-state double integrator, GPS, altimeter and random ground sensors."""
    cfg = config or ScenarioConfig()
    rng = np.random.default_rng(seed)
    A, B = double_integrator(cfg.dt)
    p0 = rng.uniform(-cfg.init_box, cfg.init_box, size=3)
    sys = LinearSystem(
        A=A, B=B, W=np.eye(6), x0_mean=np.concatenate([p0, np.zeros(3)]), x0_cov=np.eye(6), T=cfg.T
    )
    gps = SensorModel(0, np.hstack([np.eye(3), np.zeros((3, 3))]), 2.0 * np.eye(3), "gps")
    alt = SensorModel(1, np.eye(6)[2:3], np.array([[0.25]]), "altimeter")
    ground = [
        SensorModel(2 + k, rng.standard_normal((1, 6)), np.eye(1), f"ground{k}") for k in range(cfg.n_ground)
    ]
    return sys, [gps, alt, *ground]

"""Time integration of the chain, its modal reductions and a comparison system.

Four vector fields are provided:

``FullChain``
    the periodic four-particle alpha-chain in original variables
    ``(q1..q4, v1..v4)``;
``Modal``
    the three-mode system with all ten cubic couplings, in rescaled time
    (frequencies 3, 2, 1);
``IntermediateNF``
    the modal system truncated to the ``d6`` and ``d9`` couplings;
``ComparisonHHC``
    a 1:2:3 resonant Hamiltonian that does not come from a chain.

The 3-dof systems use the state ``(x1, x2, x3, v1, v2, v3)`` with ``v = x'``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.stats import qmc

from .errors import DomainError, IntegrationError, InvalidDimensionError
from .lattice import as_inverse_masses

MODAL_OMEGA = np.array([3.0, 2.0, 1.0])
HHC_OMEGA = np.array([1.0, 2.0, 3.0])
#: modal time is chain time divided by this factor
TIME_RESCALE = np.sqrt(14.0)


@dataclass(frozen=True, eq=False)
class FullChain:
    """Periodic alpha-chain ``m_j q_j'' = -dV/dq_j`` with inverse masses ``a``."""

    a: np.ndarray
    alpha: float = 1.0
    eps: float = 0.0
    kind = "FullChain"
    dim = 8

    def __post_init__(self):
        object.__setattr__(self, "a", as_inverse_masses(self.a).a)
        if self.a.size != 4:
            raise InvalidDimensionError("FullChain is implemented for four particles")
        if self.eps < 0:
            raise DomainError("eps must be non-negative")

    def _bonds(self, q):
        return np.roll(q, -1, axis=0) - q  # q_{j+1} - q_j

    def rhs(self, t, y):
        q, v = y[:4], y[4:]
        d = self._bonds(q)
        dm = np.roll(d, 1, axis=0)  # q_j - q_{j-1}
        a = self.a.reshape((4,) + (1,) * (q.ndim - 1))
        force = d - dm - self.eps * self.alpha * (dm * dm - d * d)
        return np.concatenate([v, a * force])

    def h2(self, y):
        q, v = y[:4], y[4:]
        a = self.a.reshape((4,) + (1,) * (q.ndim - 1))
        return 0.5 * np.sum(v * v / a, axis=0) + 0.5 * np.sum(self._bonds(q) ** 2, axis=0)

    def energy(self, y):
        return self.h2(y) + self.eps * self.alpha / 3 * np.sum(self._bonds(y[:4]) ** 3, axis=0)

    def momentum(self, y):
        a = self.a.reshape((4,) + (1,) * (y.ndim - 1))
        return np.sum(y[4:] / a, axis=0)

    def mode_energies(self, y):
        from .transform import transform_numeric

        tp = transform_numeric(self.a)
        x, w = tp.K.T @ y[:4], tp.K.T @ y[4:]
        lam = tp.eigenvalues[:3].reshape((3,) + (1,) * (y.ndim - 1))
        return 0.5 * (w[:3] ** 2 + lam * x[:3] ** 2)

    def mode_frequencies(self):
        from .transform import transform_numeric

        return np.sqrt(transform_numeric(self.a).eigenvalues[:3])


class _ThreeDof:
    dim = 6
    omega = MODAL_OMEGA

    def potential(self, x):
        raise NotImplementedError

    def grad(self, x):
        raise NotImplementedError

    def rhs(self, t, y):
        x, v = y[:3], y[3:]
        w2 = (self.omega**2).reshape((3,) + (1,) * (x.ndim - 1))
        return np.concatenate([v, -w2 * x - self.coupling * self.eps * self.grad(x)])

    def mode_energies(self, y):
        x, v = y[:3], y[3:]
        w = self.omega.reshape((3,) + (1,) * (x.ndim - 1))
        return 0.5 * (v * v + w * w * x * x)

    def h2(self, y):
        return np.sum(self.mode_energies(y), axis=0)

    def energy(self, y):
        return self.h2(y) + self.coupling * self.eps * self.potential(y[:3])

    def momentum(self, y):
        return np.zeros(np.shape(y)[1:]) if np.ndim(y) > 1 else 0.0

    def mode_frequencies(self):
        return self.omega.copy()


@dataclass(frozen=True, eq=False)
class Modal(_ThreeDof):
    """Modal equations ``x'' + diag(9, 4, 1) x = -14 eps grad H3``."""

    d: np.ndarray
    eps: float = 0.0
    kind = "Modal"
    coupling = 14.0

    def __post_init__(self):
        d = self.d.as_array() if hasattr(self.d, "as_array") else np.asarray(self.d, float)
        if d.shape != (10,):
            raise InvalidDimensionError("Modal needs ten cubic coefficients")
        object.__setattr__(self, "d", d)
        if self.eps < 0:
            raise DomainError("eps must be non-negative")

    def potential(self, x):
        d1, d2, d3, d4, d5, d6, d7, d8, d9, d10 = self.d
        x1, x2, x3 = x
        return (d1 * x1**3 + d2 * x1**2 * x2 + d3 * x1**2 * x3 + d4 * x2**2 * x1 + d5 * x3**2 * x1
                + d6 * x1 * x2 * x3 + d7 * x2**3 + d8 * x3**3 + d9 * x3**2 * x2 + d10 * x2**2 * x3)

    def grad(self, x):
        d1, d2, d3, d4, d5, d6, d7, d8, d9, d10 = self.d
        x1, x2, x3 = x
        return np.array([
            3 * d1 * x1**2 + 2 * d2 * x1 * x2 + 2 * d3 * x1 * x3 + d4 * x2**2 + d5 * x3**2 + d6 * x2 * x3,
            d2 * x1**2 + 2 * d4 * x2 * x1 + d6 * x1 * x3 + 3 * d7 * x2**2 + d9 * x3**2 + 2 * d10 * x2 * x3,
            d3 * x1**2 + 2 * d5 * x3 * x1 + d6 * x1 * x2 + 3 * d8 * x3**2 + 2 * d9 * x2 * x3 + d10 * x2**2,
        ])


@dataclass(frozen=True, eq=False)
class IntermediateNF(_ThreeDof):
    """Modal equations keeping only ``d6 x1 x2 x3 + d9 x2 x3^2``."""

    d6: float
    d9: float = 0.0
    eps: float = 0.0
    kind = "IntermediateNF"
    coupling = 14.0

    def __post_init__(self):
        if self.eps < 0:
            raise DomainError("eps must be non-negative")

    def potential(self, x):
        x1, x2, x3 = x
        return self.d6 * x1 * x2 * x3 + self.d9 * x2 * x3 * x3

    def grad(self, x):
        x1, x2, x3 = x
        return np.array([self.d6 * x2 * x3,
                         self.d6 * x1 * x3 + self.d9 * x3 * x3,
                         self.d6 * x1 * x2 + 2 * self.d9 * x2 * x3])


@dataclass(frozen=True, eq=False)
class ComparisonHHC(_ThreeDof):
    """``H = sum w_i (p_i^2 + q_i^2)/2 - eps q1^2 (a2 q2 + a3 q3) - eps b q1 q2 q3``, ``w = (1, 2, 3)``.

    Written in velocities ``v_i = w_i p_i``.
    """

    a2: float
    a3: float
    b: float
    eps: float = 0.0
    kind = "ComparisonHHC"
    omega = HHC_OMEGA
    coupling = 1.0

    def __post_init__(self):
        if self.eps < 0:
            raise DomainError("eps must be non-negative")

    def potential(self, x):
        x1, x2, x3 = x
        return -x1 * x1 * (self.a2 * x2 + self.a3 * x3) - self.b * x1 * x2 * x3

    def grad(self, x):
        x1, x2, x3 = x
        return np.array([-2 * x1 * (self.a2 * x2 + self.a3 * x3) - self.b * x2 * x3,
                         -self.a2 * x1 * x1 - self.b * x1 * x3,
                         -self.a3 * x1 * x1 - self.b * x1 * x2])

    def rhs(self, t, y):
        x, v = y[:3], y[3:]
        w = self.omega.reshape((3,) + (1,) * (x.ndim - 1))
        return np.concatenate([v, -w * w * x - self.eps * w * self.grad(x)])

    def mode_energies(self, y):
        x, v = y[:3], y[3:]
        w = self.omega.reshape((3,) + (1,) * (x.ndim - 1))
        return 0.5 * w * (x * x + v * v / (w * w))


SystemSpec = Union[FullChain, Modal, IntermediateNF, ComparisonHHC]


def _check_state(spec, state):
    y = np.asarray(state, dtype=float)
    if y.shape[0] != spec.dim:
        raise InvalidDimensionError(f"{spec.kind} state needs {spec.dim} entries, got {y.shape[0]}")
    return y


def rhs(spec: SystemSpec, state) -> np.ndarray:
    """Vector field of ``spec`` at ``state`` (time independent)."""
    return spec.rhs(0.0, _check_state(spec, state))


def h2_of_state(spec: SystemSpec, state) -> float:
    """Quadratic part of the energy."""
    return spec.h2(_check_state(spec, state))


def energy_of_state(spec: SystemSpec, state) -> float:
    return spec.energy(_check_state(spec, state))


def actions(spec: SystemSpec, state) -> np.ndarray:
    """Actions ``tau_i = (w_i/2) r_i^2``, ``r_i^2 = x_i^2 + v_i^2 / w_i^2``."""
    e = spec.mode_energies(_check_state(spec, state))
    w = spec.mode_frequencies().reshape((3,) + (1,) * (np.ndim(e) - 1))
    return e / w


def simplex_coordinates(spec: SystemSpec, state) -> np.ndarray:
    """Mode-energy fractions ``E_i / sum E_j`` (points of the action simplex)."""
    e = spec.mode_energies(_check_state(spec, state))
    return e / np.sum(e, axis=0)


@dataclass(frozen=True)
class TrajectoryRecord:
    t: float
    state: np.ndarray
    H: float
    H2: float
    momentum: float
    actions: np.ndarray


@dataclass(eq=False)
class Trajectory:
    """Sampled solution with diagnostics along it (arrays indexed by sample)."""

    spec: SystemSpec
    t: np.ndarray
    states: np.ndarray  # (nt, dim)
    H: np.ndarray
    H2: np.ndarray
    momentum: np.ndarray
    actions: np.ndarray  # (nt, 3)
    info: dict = field(default_factory=dict)

    @property
    def records(self) -> list[TrajectoryRecord]:
        return [TrajectoryRecord(float(self.t[i]), self.states[i], float(self.H[i]), float(self.H2[i]),
                                 float(self.momentum[i]), self.actions[i]) for i in range(self.t.size)]

    def energy_drift(self) -> float:
        return float(np.abs(self.H - self.H[0]).max() / abs(self.H[0]))


def _diagnostics(spec, t, Y, info):
    Yt = Y.T
    mom = spec.momentum(Yt) if spec.kind == "FullChain" else np.zeros(t.size)
    return Trajectory(spec, t, Y, spec.energy(Yt), spec.h2(Yt), np.atleast_1d(mom),
                      actions(spec, Yt).T, info)


def integrate(spec: SystemSpec, state0, T: float, sample_dt: float | None = None, *,
              t_eval=None, method: str = "DOP853", rtol: float = 1e-10, atol: float = 1e-10,
              backward: bool = False) -> Trajectory:
    """Integrate ``spec`` from ``state0`` over ``[0, T]`` with adaptive Runge-Kutta.

    Samples are taken at multiples of ``sample_dt`` (or at ``t_eval``) from
    the dense output.  ``backward=True`` integrates from ``0`` to ``-T``.
    Raises :class:`IntegrationError` carrying the partial trajectory if the
    step size collapses.
    """
    y0 = _check_state(spec, state0)
    if T <= 0:
        raise DomainError("T must be positive")
    sign = -1.0 if backward else 1.0
    if t_eval is None:
        dt = sample_dt if sample_dt is not None else T / 1000
        n = int(np.floor(T / dt + 1e-9))
        t_eval = np.arange(n + 1) * dt
        if t_eval[-1] < T - 1e-12:
            t_eval = np.append(t_eval, T)
    t_eval = sign * np.asarray(t_eval, float)
    sol = solve_ivp(spec.rhs, (0.0, sign * T), y0, method=method, t_eval=t_eval,
                    rtol=rtol, atol=atol, vectorized=True)
    info = {"method": method, "rtol": rtol, "atol": atol, "nfev": int(sol.nfev), "status": int(sol.status)}
    traj = _diagnostics(spec, sol.t, sol.y.T, info)
    if sol.status < 0:
        raise IntegrationError(f"integration failed: {sol.message}", partial=traj)
    return traj


def integrate_verlet(chain: FullChain, state0, T: float, dt: float, sample_every: int = 1) -> Trajectory:
    """Fixed-step velocity Verlet for the chain (symplectic cross-check)."""
    y = _check_state(chain, state0).copy()
    nsteps = int(round(T / dt))
    q, v = y[:4].copy(), y[4:].copy()

    def acc(q):
        return chain.rhs(0.0, np.concatenate([q, np.zeros(4)]))[4:]

    a = acc(q)
    ts, out = [0.0], [np.concatenate([q, v])]
    for k in range(1, nsteps + 1):
        v += 0.5 * dt * a
        q += dt * v
        a = acc(q)
        v += 0.5 * dt * a
        if k % sample_every == 0:
            ts.append(k * dt)
            out.append(np.concatenate([q, v]))
    return _diagnostics(chain, np.array(ts), np.array(out), {"method": "verlet", "dt": dt})


# ---------------------------------------------------------------- ensembles

@dataclass(frozen=True)
class EnsembleSpec:
    """Initial conditions clustered around a normal-mode vertex.

    ``center`` is ``"mode1"``, ``"mode2"``, ``"mode3"`` (mode index in the
    state ordering) or an explicit 6-vector.  Members are placed by a
    scrambled Halton sequence in a ball of radius ``spread`` in the four
    transverse energy coordinates and rescaled to total quadratic energy
    ``E0``.
    """

    center: object = "mode1"
    count: int = 98
    spread: float | None = None
    seed: int = 0
    E0: float = 4.5

    def __post_init__(self):
        if self.count < 1:
            raise DomainError("ensemble count must be at least 1")
        if self.E0 <= 0:
            raise DomainError("E0 must be positive")


@dataclass(frozen=True, eq=False)
class SimplexSnapshot:
    t: float
    points: np.ndarray  # (count, 3)

    def spread(self) -> float:
        """Largest pairwise distance between points."""
        p = self.points
        return float(np.sqrt(((p[:, None, :] - p[None, :, :]) ** 2).sum(-1)).max())


def _energy_scales(spec):
    w = spec.mode_frequencies()
    if spec.kind == "ComparisonHHC":
        return np.sqrt(w), 1 / np.sqrt(w)
    return w, np.ones(3)


def ensemble_states(spec: SystemSpec, e: EnsembleSpec) -> np.ndarray:
    """Initial states, shape ``(count, 6)``, deterministic in ``e.seed``."""
    if spec.dim != 6:
        raise InvalidDimensionError("ensembles are defined for the 3-dof systems")
    cx, cv = _energy_scales(spec)
    spread = e.spread if e.spread is not None else 0.05 * np.sqrt(2 * e.E0)
    if isinstance(e.center, str):
        if e.center not in ("mode1", "mode2", "mode3"):
            raise DomainError(f"unknown ensemble center {e.center!r}")
        k = int(e.center[-1]) - 1
    else:
        c = _check_state(spec, e.center)
        k = int(np.argmax(spec.mode_energies(c)))
    others = [j for j in range(3) if j != k]
    sampler = qmc.Halton(d=4, scramble=True, seed=e.seed)
    pts = []
    while len(pts) < e.count:
        cand = 2 * sampler.random(4 * e.count) - 1
        pts.extend(cand[np.sum(cand * cand, axis=1) <= 1])
    pts = spread * np.array(pts[: e.count])
    states = np.zeros((e.count, 6))
    for j, col in zip(others, (0, 2)):
        states[:, j] = pts[:, col] / cx[j]
        states[:, 3 + j] = pts[:, col + 1] / cv[j]
    e_trans = 0.5 * np.sum(pts * pts, axis=1)
    if np.any(e_trans >= e.E0):
        raise DomainError("spread too large for the requested energy")
    states[:, k] = np.sqrt(2 * (e.E0 - e_trans)) / cx[k]
    return states


def ensemble_simplex(spec: SystemSpec, e: EnsembleSpec, times, rtol: float = 1e-10,
                     atol: float = 1e-10) -> list[SimplexSnapshot]:
    """Integrate an ensemble as one vectorized system and record simplex points."""
    Y0 = ensemble_states(spec, e)
    n = Y0.shape[0]
    times = np.asarray(sorted(times), float)

    def f(t, y):
        Y = y.reshape(6, n, -1) if y.ndim > 1 else y.reshape(6, n)
        return spec.rhs(t, Y).reshape(y.shape)

    if times[-1] > 0:
        sol = solve_ivp(f, (0.0, times[-1]), Y0.T.ravel(), method="DOP853", t_eval=times,
                        rtol=rtol, atol=atol, vectorized=True)
        if sol.status < 0:
            raise IntegrationError(f"ensemble integration failed: {sol.message}")
        Ys = sol.y.T
    else:
        Ys = np.repeat(Y0.T.ravel()[None, :], times.size, axis=0)
    out = []
    for t, y in zip(times, Ys):
        Y = y.reshape(6, n)
        out.append(SimplexSnapshot(float(t), simplex_coordinates(spec, Y).T))
    return out


# ---------------------------------------------------------------- presets

@dataclass(frozen=True, eq=False)
class Preset:
    name: str
    spec: SystemSpec
    state0: np.ndarray
    T: float
    eps: float
    description: str = ""


_CASE_U = {"case0": 0.0, "case1": 0.534105, "case2": 0.826713}
_X_START = {"": (1.0, 0.1, 0.1), "_x2": (0.1, 1.5, 0.1)}


def chain_state_from_modal(u: float, x, v) -> np.ndarray:
    """Chain state for modal position ``x`` and rescaled-time velocity ``v``.

    Chain time is ``sqrt(14)`` times modal time, hence the velocity factor.
    """
    from .transform import transform_pair

    L = transform_pair(u).L
    x4 = np.append(np.asarray(x, float), 0.0)
    v4 = np.append(np.asarray(v, float), 0.0) / TIME_RESCALE
    return np.concatenate([L @ x4, L @ v4])


def preset_names() -> list[str]:
    names = []
    for case in _CASE_U:
        for suffix in _X_START:
            names += [case + suffix, "modal_" + case + suffix, "chain_" + case + suffix]
    return names + ["hhc_left", "hhc_right"]


def preset(name: str, eps: float | None = None) -> Preset:
    """Published parameter sets.

    ``caseN`` / ``caseN_x2`` use the intermediate normal form, ``modal_*``
    the full modal cubic and ``chain_*`` the chain itself (original time,
    ``T = 1000 sqrt 14``).  ``_x2`` starts at ``(0.1, 1.5, 0.1)``, otherwise
    ``(1, 0.1, 0.1)``; velocities are zero.
    """
    from .transform import cubic_from_table

    if name in ("hhc_left", "hhc_right"):
        e = 0.5 if eps is None else eps
        x0 = (0.1, 1.0, 0.5) if name == "hhc_left" else (2.0, 1.0, -0.05)
        return Preset(name, ComparisonHHC(3.0, 1.0, 1.0, e), np.array([*x0, 0, 0, 0], float), 1000.0, e,
                      "comparison Hamiltonian, a2=3, a3=1, b=1")
    base = name
    family = "nf"
    for prefix in ("modal_", "chain_"):
        if name.startswith(prefix):
            family, base = prefix[:-1], name[len(prefix):]
    suffix = "_x2" if base.endswith("_x2") else ""
    case = base[: len(base) - len(suffix)]
    if case not in _CASE_U:
        raise DomainError(f"unknown preset {name!r}; choose from {preset_names()}")
    u = _CASE_U[case]
    e = 0.5 if eps is None else eps
    x0 = np.array(_X_START[suffix])
    d = cubic_from_table(u)
    if family == "nf":
        spec = IntermediateNF(d.d6, d.d9 if u > 0 else 0.0, e)
        return Preset(name, spec, np.concatenate([x0, np.zeros(3)]), 1000.0, e, f"intermediate normal form, u={u}")
    if family == "modal":
        return Preset(name, Modal(d, e), np.concatenate([x0, np.zeros(3)]), 1000.0, e, f"modal cubic, u={u}")
    from .fiber import fiber123

    chain = FullChain(fiber123(u).a, 1.0, e)
    return Preset(name, chain, chain_state_from_modal(u, x0, np.zeros(3)), 1000.0 * TIME_RESCALE, e,
                  f"full chain, u={u}, original time")

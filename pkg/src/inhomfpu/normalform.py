"""Averaged dynamics of the 1:2:3 intermediate normal form.

The intermediate system (rescaled time, frequencies 3, 2, 1)

    x1'' + 9 x1 = -14 eps d6 x2 x3
    x2'' + 4 x2 = -14 eps (d6 x1 x3 + d9 x3^2)
    x3'' +   x3 = -14 eps (d6 x1 x2 + 2 d9 x2 x3)

is averaged in two coordinate systems.  Amplitude/phase variables
``x_i = r_i cos(w_i t + psi_i)`` with combination angles
``chi1 = psi1 - psi2 - psi3`` and ``chi2 = 2 psi3 - psi2`` are convenient
away from the coordinate planes; co-moving variables

    x1 = y1 cos 3t + (y2/3) sin 3t
    x2 = z1 cos 2t + (z2/2) sin 2t
    x3 = u1 cos t  +  u2    sin t

are regular everywhere and are used for the normal modes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import CoordinatePlaneError, ModeNonexistentError, SingularFormulaError

R_MIN = 1e-8
CLASSES = ("EE", "EH", "HH", "C")


@dataclass(frozen=True)
class PolarNFState:
    r1: float
    r2: float
    r3: float
    chi1: float
    chi2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.r1, self.r2, self.r3, self.chi1, self.chi2])

    @classmethod
    def from_array(cls, v) -> "PolarNFState":
        return cls(*map(float, v))

    @property
    def r(self) -> np.ndarray:
        return np.array([self.r1, self.r2, self.r3])


@dataclass(frozen=True)
class CoMovingState:
    y1: float
    y2: float
    z1: float
    z2: float
    u1: float
    u2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.y1, self.y2, self.z1, self.z2, self.u1, self.u2])

    @classmethod
    def from_array(cls, v) -> "CoMovingState":
        return cls(*map(float, v))


def _arr(s, size):
    if hasattr(s, "as_array"):
        return s.as_array()
    v = np.asarray(s, dtype=float)
    if v.shape[0] != size:
        raise ValueError(f"expected {size} components, got {v.shape[0]}")
    return v


def nf_polar_rhs(s, d6: float, d9: float, eps: float = 1.0, r_min: float = R_MIN) -> np.ndarray:
    """Averaged amplitude and combination-angle equations.

    Returns ``(r1', r2', r3', chi1', chi2')``.  Raises
    :class:`CoordinatePlaneError` if any amplitude is below ``r_min``.
    """
    r1, r2, r3, c1, c2 = _arr(s, 5)
    if min(r1, r2, r3) < r_min:
        raise CoordinatePlaneError("polar form is singular near coordinate planes; use co-moving variables")
    s1, s2, k1, k2 = np.sin(c1), np.sin(c2), np.cos(c1), np.cos(c2)
    R1, R2, R3 = r1 * r1, r2 * r2, r3 * r3
    f = 3.5 * eps
    return np.array([
        eps * 7 / 6 * d6 * r2 * r3 * s1,
        -eps * 7 / 4 * (d6 * r1 * r3 * s1 + d9 * R3 * s2),
        -f * (d6 * r1 * r2 * s1 - 2 * d9 * r2 * r3 * s2),
        f * (d6 * k1 / (r1 * r2 * r3) * (R2 * R3 / 3 - R1 * R3 / 2 - R1 * R2)
             - d9 * k2 / r2 * (R3 / 2 + 2 * R2)),
        eps * 7 / 4 * (d6 * r1 * k1 / (r2 * r3) * (4 * R2 - R3) + d9 * k2 / r2 * (8 * R2 - R3)),
    ])


def nf_comoving_rhs(s, d6: float, d9: float, eps: float = 1.0) -> np.ndarray:
    """Averaged equations in co-moving variables ``(y1, y2, z1, z2, u1, u2)``.

    Accepts a trailing batch axis: ``s`` may have shape ``(6, ...)``.
    """
    y1, y2, z1, z2, u1, u2 = _arr(s, 6)
    f = 3.5 * eps
    return np.array([
        eps * 7 / 6 * d6 * (z1 * u2 + z2 * u1 / 2),
        -f * d6 * (z1 * u1 - z2 * u2 / 2),
        f * (d6 / 2 * (-y1 * u2 + y2 * u1 / 3) + d9 * u1 * u2),
        -f * (d6 * (y1 * u1 + y2 * u2 / 3) + d9 * (u1 * u1 - u2 * u2)),
        f * (d6 * (-y1 * z2 / 2 + y2 * z1 / 3) + d9 * (-2 * z1 * u2 + z2 * u1)),
        -f * (d6 * (y1 * z1 + y2 * z2 / 6) + d9 * (2 * z1 * u1 + z2 * u2)),
    ])


def comoving_from_polar(r, psi) -> np.ndarray:
    """Co-moving state from amplitudes ``r`` and phases ``psi`` (mode order 1, 2, 3)."""
    r1, r2, r3 = r
    p1, p2, p3 = psi
    return np.array([r1 * np.cos(p1), -3 * r1 * np.sin(p1),
                     r2 * np.cos(p2), -2 * r2 * np.sin(p2),
                     r3 * np.cos(p3), -r3 * np.sin(p3)])


def polar_from_comoving(c):
    """Inverse of :func:`comoving_from_polar`; returns ``(r, psi)``."""
    y1, y2, z1, z2, u1, u2 = _arr(c, 6)
    r = np.array([np.hypot(y1, y2 / 3), np.hypot(z1, z2 / 2), np.hypot(u1, u2)])
    psi = np.array([np.arctan2(-y2 / 3, y1), np.arctan2(-z2 / 2, z1), np.arctan2(-u2, u1)])
    return r, psi


def combination_angles(psi):
    p1, p2, p3 = psi
    return p1 - p2 - p3, 2 * p3 - p2


def amplitudes_squared(c) -> np.ndarray:
    """``(r1^2, r2^2, r3^2)`` from a co-moving state (batch axis allowed)."""
    y1, y2, z1, z2, u1, u2 = _arr(c, 6)
    return np.array([y1 * y1 + y2 * y2 / 9, z1 * z1 + z2 * z2 / 4, u1 * u1 + u2 * u2])


def nf_integrals(s):
    """``(h2, third) = (9 r1^2 + 4 r2^2 + r3^2, 2 r2^2 - r3^2)``.

    ``s`` is a :class:`PolarNFState`, a :class:`CoMovingState`, or a bare
    amplitude triple.  ``third`` is conserved only when ``d9 = 0``.
    """
    if isinstance(s, CoMovingState):
        R1, R2, R3 = amplitudes_squared(s)
    else:
        v = s.as_array() if isinstance(s, PolarNFState) else np.asarray(s, float)
        R1, R2, R3 = v[0] ** 2, v[1] ** 2, v[2] ** 2
    return 9 * R1 + 4 * R2 + R3, 2 * R2 - R3


def integrate_comoving(state0, d6, d9, eps, T, t_eval=None, rtol=1e-12, atol=1e-12):
    """Integrate the co-moving normal form; returns the ``solve_ivp`` result."""
    y0 = _arr(state0, 6)
    sol = solve_ivp(lambda t, y: nf_comoving_rhs(y, d6, d9, eps), (0.0, T), y0,
                    method="DOP853", t_eval=t_eval, rtol=rtol, atol=atol, vectorized=True)
    return sol


# ---------------------------------------------------------------- tori and periodic solutions

@dataclass(frozen=True, eq=False)
class ToriCurve:
    """Relative equilibria of the ``d9 = 0`` normal form at fixed energy."""

    E0: float
    chi: float
    r: np.ndarray  # shape (n, 3)

    def residual(self) -> np.ndarray:
        R2, R3 = self.r[:, 1] ** 2, self.r[:, 2] ** 2
        return 2 * R2 * R3 + 4 / 3 * R2**2 + R3**2 / 6 - self.E0 / 3 * (2 * R2 + R3)


def tori_r3_squared(R2, E0):
    """Positive root ``R3`` of the torus condition for given ``R2 = r2^2``."""
    R2 = np.asarray(R2, float)
    b = 2 * R2 - E0 / 3
    c = 4 / 3 * R2**2 - 2 / 3 * E0 * R2
    return 3 * (-b + np.sqrt(b * b - 2 / 3 * c))


def find_tori_case0(E0: float, chi: float = 0.0, n: int = 200) -> ToriCurve:
    """Sample the torus of periodic solutions connecting the x2 and x3 modes.

    ``r2^2`` runs over ``n`` interior points of ``(0, E0/2)``; ``r3`` comes
    from the torus condition and ``r1`` from ``9 r1^2 + 4 r2^2 + r3^2 = 2 E0``.
    """
    if E0 <= 0:
        raise ValueError("E0 must be positive")
    R2 = np.linspace(0, E0 / 2, n + 2)[1:-1]
    R3 = tori_r3_squared(R2, E0)
    R1 = np.maximum((2 * E0 - 4 * R2 - R3) / 9, 0.0)
    return ToriCurve(E0, float(chi), np.sqrt(np.column_stack([R1, R2, R3])))


@dataclass(eq=False)
class StabilityReport:
    """Linearized spectrum in units of ``scale = 7 eps / 2``.

    ``exponents`` gives the actual characteristic exponents.
    """

    eigenvalues: np.ndarray
    classification: str
    scale: float = 3.5
    matrix: np.ndarray | None = None
    mode: str = ""

    @property
    def exponents(self) -> np.ndarray:
        return self.scale * self.eigenvalues

    def to_dict(self) -> dict:
        ev = self.eigenvalues
        return {"mode": self.mode, "class": self.classification, "scale": self.scale,
                "eigenvalues": [[float(z.real), float(z.imag)] for z in ev]}


@dataclass(eq=False)
class PeriodicSolution:
    kind: str
    r: np.ndarray
    chi: tuple
    E0: float
    residual: float
    stability: StabilityReport | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "r": self.r.tolist(), "chi": list(self.chi),
               "E0": self.E0, "residual": self.residual}
        if self.stability is not None:
            out["stability"] = self.stability.to_dict()
        return out


def _general_system(r, sigma, q, E0):
    r1, r2, r3 = r
    R1, R2, R3 = r1 * r1, r2 * r2, r3 * r3
    F = np.array([
        R2 * R3 / 3 - R1 * R3 / 2 - R1 * R2 - sigma * q * r1 * r3 * (R3 / 2 + 2 * R2),
        r1 * (4 * R2 - R3) - sigma * q * r3 * (R3 - 8 * R2),
        9 * R1 + 4 * R2 + R3 - 2 * E0,
    ])
    J = np.empty((3, 3) + np.shape(r1))
    J[0, 0] = -r1 * R3 - 2 * r1 * R2 - sigma * q * r3 * (R3 / 2 + 2 * R2)
    J[0, 1] = 2 * r2 * R3 / 3 - 2 * r2 * R1 - sigma * q * r1 * r3 * 4 * r2
    J[0, 2] = 2 * r3 * R2 / 3 - r3 * R1 - sigma * q * r1 * (1.5 * R3 + 2 * R2)
    J[1, 0] = 4 * R2 - R3
    J[1, 1] = 8 * r1 * r2 + sigma * q * r3 * 16 * r2
    J[1, 2] = -2 * r1 * r3 - sigma * q * (3 * R3 - 8 * R2)
    J[2, 0] = 18 * r1
    J[2, 1] = 8 * r2
    J[2, 2] = 2 * r3
    return F, J


def _newton_batch(seeds, sigma, q, E0, iters=60):
    r = seeds.T.copy()
    for _ in range(iters):
        F, J = _general_system(r, sigma, q, E0)
        Jm = np.moveaxis(J, -1, 0)
        Fm = F.T
        ok = np.abs(np.linalg.det(Jm)) > 1e-300
        step = np.zeros_like(Fm)
        step[ok] = np.linalg.solve(Jm[ok], Fm[ok][..., None])[..., 0]
        norm0 = np.linalg.norm(Fm, axis=1)
        lam = np.ones(r.shape[1])
        for _ in range(8):  # backtracking on the residual norm
            trial = r - lam * step.T
            Ft, _ = _general_system(trial, sigma, q, E0)
            worse = np.linalg.norm(Ft.T, axis=1) > norm0
            if not worse.any():
                break
            lam = np.where(worse, lam / 2, lam)
        r = r - lam * step.T
    F, _ = _general_system(r, sigma, q, E0)
    return r.T, np.linalg.norm(F.T, axis=1)


def find_periodic_general(E0: float, q: float, d6: float = 1.0, eps: float = 1.0,
                          grid: int = 200, with_stability: bool = True) -> list[PeriodicSolution]:
    """Periodic solutions in general position (all ``r_i > 0``).

    For each sign ``sigma = cos chi1 cos chi2`` the amplitude conditions from
    ``chi1' = chi2' = 0`` together with the energy constraint are solved by
    damped Newton iteration from a ``grid x grid`` seed lattice on the
    positive octant of the energy ellipsoid.  Every amplitude root gives two
    periodic solutions, one per phase pair with that ``sigma``.
    """
    if E0 <= 0:
        raise ValueError("E0 must be positive")
    d9 = q * d6
    th, ph = np.meshgrid(np.linspace(0, np.pi / 2, grid + 2)[1:-1],
                         np.linspace(0, np.pi / 2, grid + 2)[1:-1])
    th, ph = th.ravel(), ph.ravel()
    rad = np.sqrt(2 * E0)
    seeds = np.column_stack([rad / 3 * np.sin(th) * np.cos(ph),
                             rad / 2 * np.sin(th) * np.sin(ph),
                             rad * np.cos(th)])
    out = []
    for sigma, phases in ((1, ((0.0, 0.0), (np.pi, np.pi))), (-1, ((0.0, np.pi), (np.pi, 0.0)))):
        roots, res = _newton_batch(seeds, sigma, q, E0)
        good = (res < 1e-10 * max(1.0, E0**2)) & np.all(roots > 1e-6, axis=1)
        uniq = []
        for rt in roots[good]:
            if not any(np.abs(rt - u).max() < 1e-8 for u in uniq):
                uniq.append(rt)
        uniq.sort(key=lambda v: tuple(v))
        for rt in uniq:
            for chi in phases:
                st = np.concatenate([rt, chi])
                resid = float(np.abs(nf_polar_rhs(st, d6, d9, eps)).max())
                rep = polar_stability(st, d6, d9, eps) if with_stability else None
                out.append(PeriodicSolution("GeneralPosition", rt, chi, E0, resid, rep, {"sigma": sigma}))
    return out


# ---------------------------------------------------------------- stability

def classify_eigenvalues(ev, rtol: float = 1e-7) -> str:
    """Stability class of a Hamiltonian spectrum (zero eigenvalues ignored).

    ``EE``: all nonzero eigenvalues imaginary.  ``HH``: all real.  ``EH``:
    one pair of each.  ``C``: a quartet off both axes.
    """
    ev = np.asarray(ev, dtype=complex)
    big = np.abs(ev).max(initial=0.0)
    if big == 0:
        return "EE"
    tol = rtol * big
    ev = ev[np.abs(ev) > tol]
    re, im = np.abs(ev.real) > tol, np.abs(ev.imag) > tol
    if np.any(re & im):
        return "C"
    if not re.any():
        return "EE"
    if not im.any():
        return "HH"
    return "EH"


def edge_family(A: float, B: float, d6: float, d9: float):
    """Amplitudes ``(C, D)`` of the x1 component on the ``x2 = 0`` family.

    ``x1 = C cos 3t + D sin 3t`` accompanies ``x3 = A cos t + B sin t``.
    """
    if d6 == 0:
        raise SingularFormulaError("edge family needs d6 != 0")
    n = A * A + B * B
    if n == 0:
        raise ValueError("A^2 + B^2 must be positive")
    q = d9 / d6
    return q * A * (3 * B * B - A * A) / n, -q * B * (3 * A * A - B * B) / n


def mode_matrix(mode, d6, d9, A=1.0, B=0.0) -> np.ndarray:
    """Linearized transverse dynamics of a periodic solution, in units of 7 eps / 2.

    Modes ``1``, ``2``, ``3`` act on ``(z, u)``, ``(y, u)`` and ``(y, z)``
    respectively; ``"edge"`` acts on ``(y, z, u)``.
    """
    mode = str(mode)
    if mode == "1":
        return np.array([[0, 0, -d6 * B / 2, d6 * A / 2],
                         [0, 0, d6 * A, d6 * B],
                         [-d6 * B, d6 * A / 2, 0, 0],
                         [d6 * A, d6 * B / 2, 0, 0]], dtype=float)
    if mode == "2":
        return np.array([[0, 0, d6 * B / 3, d6 * A / 3],
                         [0, 0, -d6 * A, d6 * B],
                         [-d6 * B, d6 * A / 3, 2 * d9 * B, -2 * d9 * A],
                         [-d6 * A, -d6 * B / 3, -2 * d9 * A, -2 * d9 * B]], dtype=float)
    if mode == "3":
        if d9 != 0:
            raise ModeNonexistentError("the x3 normal mode exists only for d9 = 0")
        return np.array([[0, 0, -d6 * B / 3, -d6 * A / 6],
                         [0, 0, d6 * A, -d6 * B / 2],
                         [d6 * B / 2, -d6 * A / 6, 0, 0],
                         [d6 * A, d6 * B / 3, 0, 0]], dtype=float)
    if mode == "edge":
        C, D = edge_family(A, B, d6, d9)
        return np.array([
            [0, 0, d6 * B / 3, d6 * A / 6, 0, 0],
            [0, 0, -d6 * A, d6 * B / 2, 0, 0],
            [-d6 * B / 2, d6 * A / 6, 0, 0, d6 * D / 2 + d9 * B, -d6 * C / 2 + d9 * A],
            [-d6 * A, -d6 * B / 3, 0, 0, -d6 * C - 2 * d9 * A, -d6 * D + 2 * d9 * B],
            [0, 0, d6 * D - 2 * d9 * B, -d6 * C / 2 + d9 * A, 0, 0],
            [0, 0, -d6 * C - 2 * d9 * A, -d6 * D / 2 - d9 * B, 0, 0]], dtype=float)
    raise ValueError(f"unknown mode {mode!r}")


_TRANSVERSE = {"1": [2, 3, 4, 5], "2": [0, 1, 4, 5], "3": [0, 1, 2, 3], "edge": [0, 1, 2, 3, 4, 5]}


def mode_equilibrium(mode, d6, d9, A=1.0, B=0.0) -> np.ndarray:
    """Co-moving state of the periodic solution with amplitudes ``(A, B)``."""
    mode = str(mode)
    s = np.zeros(6)
    if mode == "1":
        s[:2] = A, 3 * B
    elif mode == "2":
        s[2:4] = A, 2 * B
    elif mode == "3":
        if d9 != 0:
            raise ModeNonexistentError("the x3 normal mode exists only for d9 = 0")
        s[4:] = A, B
    elif mode == "edge":
        C, D = edge_family(A, B, d6, d9)
        s[:2] = C, 3 * D
        s[4:] = A, B
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return s


def jacobian_fd(f, x, h=1e-6) -> np.ndarray:
    x = np.asarray(x, float)
    J = np.empty((x.size, x.size))
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        J[:, k] = (f(x + e) - f(x - e)) / (2 * h)
    return J


def comoving_linearization(mode, d6, d9, A=1.0, B=0.0, eps=1.0) -> np.ndarray:
    """Transverse Jacobian of :func:`nf_comoving_rhs`, in units of 7 eps / 2."""
    s0 = mode_equilibrium(mode, d6, d9, A, B)
    J = jacobian_fd(lambda s: nf_comoving_rhs(s, d6, d9, eps), s0)
    idx = _TRANSVERSE[str(mode)]
    return J[np.ix_(idx, idx)] / (3.5 * eps)


def normal_mode_stability(mode, d6: float, d9: float, A: float = 1.0, B: float = 0.0,
                          eps: float = 1.0) -> StabilityReport:
    """Stability of a normal mode (``1``, ``2``, ``3``) or the ``edge`` family."""
    if A * A + B * B <= 0:
        raise ValueError("A^2 + B^2 must be positive")
    M = mode_matrix(mode, d6, d9, A, B)
    ev = np.linalg.eigvals(M)
    ev = ev[np.lexsort((ev.imag, ev.real))]
    return StabilityReport(ev, classify_eigenvalues(ev), 3.5 * eps, M, str(mode))


def mode2_lambda_squared(d6, d9, A=1.0, B=0.0) -> np.ndarray:
    """Closed-form squared eigenvalues of the x2-mode matrix (two values)."""
    root = np.sqrt(complex(d9 * d9 - d6 * d6 / 3))
    base = d6 * d6 / 3 - 2 * d9 * d9
    n = A * A + B * B
    return np.array([-n * (base + 2 * d9 * root), -n * (base - 2 * d9 * root)])


def polar_stability(state, d6, d9, eps=1.0) -> StabilityReport:
    """Finite-difference linearization of the polar normal form at an equilibrium.

    The eigenvalue nearest zero (energy direction) is discarded.
    """
    x0 = _arr(state, 5)
    J = jacobian_fd(lambda s: nf_polar_rhs(s, d6, d9, eps), x0, h=1e-7 * max(1.0, np.abs(x0[:3]).max()))
    J /= 3.5 * eps
    ev = np.linalg.eigvals(J)
    ev = np.delete(ev, np.argmin(np.abs(ev)))
    ev = ev[np.lexsort((ev.imag, ev.real))]
    return StabilityReport(ev, classify_eigenvalues(ev, rtol=1e-5), 3.5 * eps, J, "general")


def hopf_scan(u_grid, eps: float = 1.0, A: float = 1.0, B: float = 0.0) -> list[tuple]:
    """Class of the x2 normal mode along the 1:2:3 branch."""
    from .transform import cubic_from_table

    out = []
    for u in u_grid:
        d = cubic_from_table(float(u))
        rep = normal_mode_stability(2, d.d6, d.d9, A, B, eps)
        out.append((float(u), rep.classification, rep.eigenvalues))
    return out

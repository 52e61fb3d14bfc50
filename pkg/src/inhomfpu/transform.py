"""Eigenmode coordinates for the 1:2:3 ring and the cubic coupling in them.

With ``A = diag(a)`` and ``A^{1/2} C A^{1/2} = U Lam U^T`` the matrices
``K = A^{-1/2} U`` and ``L = A^{1/2} U`` give the symplectic change
``p = K y``, ``q = L x`` that diagonalizes the quadratic energy.  The cubic
potential ``(alpha/3) sum (q_{j+1} - q_j)^3`` then becomes a cubic form in
``x_1, x_2, x_3`` with ten coefficients ``d_1 .. d_10`` (``x_4``, the
translation mode, drops out).

Two independent routes are provided: closed-form expressions in the branch
parameter ``u`` and a purely numerical one starting from any inverse-mass
vector.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy import sqrt

from .errors import DegenerateSpectrumError, DomainError, InconsistentTransformError, InvalidDimensionError
from .fiber import U1, fiber123
from .lattice import as_inverse_masses, build_coupling, canonical_signs, symmetric_eigen

#: normalized eigenvalues of the 1:2:3 branch, zero mode last
LAMBDA_123 = np.array([9 / 14, 2 / 7, 1 / 14, 0.0])

MONOMIALS = ("x1^3", "x1^2 x2", "x1^2 x3", "x2^2 x1", "x3^2 x1",
             "x1 x2 x3", "x2^3", "x3^3", "x3^2 x2", "x2^2 x3")
_MONO_IDX = ((0, 0, 0), (0, 0, 1), (0, 0, 2), (1, 1, 0), (2, 2, 0),
             (0, 1, 2), (1, 1, 1), (2, 2, 2), (2, 2, 1), (1, 1, 2))
_MONO_MULT = np.array([1, 3, 3, 3, 3, 6, 1, 1, 3, 3], dtype=float)

#: corrected denominator constant of d_9
D9_DENOMINATOR = 896


@dataclass(frozen=True, eq=False)
class TransformPair:
    """``K`` and ``L`` for one mass configuration (``u`` is ``nan`` if unknown)."""

    K: np.ndarray
    L: np.ndarray
    eigenvalues: np.ndarray
    a: np.ndarray
    u: float = float("nan")

    def modal_from_chain(self, q, qdot):
        """``x = K^T q`` and ``y = K^T qdot`` (``K^T`` inverts ``L``)."""
        return self.K.T @ np.asarray(q, float), self.K.T @ np.asarray(qdot, float)

    def chain_from_modal(self, x, y):
        return self.L @ np.asarray(x, float), self.L @ np.asarray(y, float)

    def to_dict(self) -> dict:
        return {"u": self.u, "a": self.a.tolist(), "eigenvalues": self.eigenvalues.tolist(),
                "K": self.K.tolist(), "L": self.L.tolist()}


@dataclass(frozen=True)
class CubicCoefficients:
    """Coefficients of ``H_3 / eps`` in the monomial order of :data:`MONOMIALS`."""

    d1: float
    d2: float
    d3: float
    d4: float
    d5: float
    d6: float
    d7: float
    d8: float
    d9: float
    d10: float
    u: float = float("nan")
    alpha: float = 1.0

    @classmethod
    def from_array(cls, d, u=float("nan"), alpha=1.0) -> "CubicCoefficients":
        return cls(*map(float, d), u=u, alpha=alpha)

    def as_array(self) -> np.ndarray:
        return np.array([self.d1, self.d2, self.d3, self.d4, self.d5,
                         self.d6, self.d7, self.d8, self.d9, self.d10])

    @property
    def q(self) -> float:
        """Ratio ``d9 / d6`` controlling the second combination angle."""
        return self.d9 / self.d6

    def potential(self, x) -> float:
        """Evaluate the cubic form at ``x = (x1, x2, x3)``."""
        x1, x2, x3 = x
        mono = np.array([x1**3, x1**2 * x2, x1**2 * x3, x2**2 * x1, x3**2 * x1,
                         x1 * x2 * x3, x2**3, x3**3, x3**2 * x2, x2**2 * x3])
        return float(self.as_array() @ mono)

    def gradient(self, x) -> np.ndarray:
        d1, d2, d3, d4, d5, d6, d7, d8, d9, d10 = self.as_array()
        x1, x2, x3 = x
        return np.array([
            3 * d1 * x1**2 + 2 * d2 * x1 * x2 + 2 * d3 * x1 * x3 + d4 * x2**2 + d5 * x3**2 + d6 * x2 * x3,
            d2 * x1**2 + 2 * d4 * x2 * x1 + d6 * x1 * x3 + 3 * d7 * x2**2 + d9 * x3**2 + 2 * d10 * x2 * x3,
            d3 * x1**2 + 2 * d5 * x3 * x1 + d6 * x1 * x2 + 3 * d8 * x3**2 + 2 * d9 * x2 * x3 + d10 * x2**2,
        ])

    def to_dict(self) -> dict:
        out = {f"d{i + 1}": v for i, v in enumerate(self.as_array().tolist())}
        out.update(u=self.u, alpha=self.alpha)
        return out


def _check_u(u):
    if not 0 <= u < U1:
        raise DomainError(f"u must lie in [0, {U1:.6f})")


def transform_closed_form(u: float) -> np.ndarray:
    """Closed-form ``L(u)`` on the 1:2:3 branch.

    Columns are eigenvectors of ``A(u) C`` for ``9/14, 2/7, 1/14, 0`` with
    a fixed sign convention; the last column is constant,
    ``1 / sqrt(sum m_j)``.
    """
    _check_u(u)
    s = sqrt
    L = np.empty((4, 4))
    den35 = 192 * s(35) * (u - 5)
    den105 = 64 * s(105) * (u - 5)
    den21 = 64 * s(21) * (u - 5)
    c4 = -s(1200 - u * (3 * (u - 22) * u + 484)) * s(40 - u * (3 * (u - 8) * u + 64)) / (96 * s(14) * (u - 5))

    L[0, 0] = s(u + 6) * (s(16 - u) * (20 - 3 * (u - 4) * u) - 18 * s(2) * s(5 - u) * s(6 - u) * s(u)) / den35
    L[1, 0] = s(16 - u) * (s(u + 6) * (-3 * (u - 16) * u - 160) + 18 * s(8 - 2 * u) * s(5 - u) * s(10 - u)) / den35
    L[2, 0] = s(u + 6) * (s(16 - u) * (20 - 3 * (u - 4) * u) + 18 * s(2) * s(5 - u) * s((6 - u) * u)) / den35
    L[3, 0] = -s(16 - u) * (s(u + 6) * (3 * (u - 16) * u + 160) + 18 * s(8 - 2 * u) * s(5 - u) * s(10 - u)) / den35

    L[0, 1] = s(4 - u) * (s(2) * s(6 - u) * (u * (3 * u - 22) - 20) + 16 * s(5 - u) * s((16 - u) * u)) / den105
    L[1, 1] = s(6 - u) * (s(8 - 2 * u) * (u * (3 * u - 38) + 60) + 16 * s(5 - u) * s((10 - u) * (u + 6))) / den105
    L[2, 1] = s(4 - u) * (s(2) * s(6 - u) * (u * (3 * u - 22) - 20) - 16 * s(5 - u) * s((16 - u) * u)) / den105
    L[3, 1] = s(6 - u) * (s(8 - 2 * u) * (u * (3 * u - 38) + 60) - 16 * s(5 - u) * s((10 - u) * (u + 6))) / den105

    L[0, 2] = s(10 - u) * (s(u) * ((28 - 3 * u) * u - 76) + 2 * s(2) * s(5 - u) * s(6 - u) * s(16 - u)) / den21
    L[1, 2] = -s(u) * (s(10 - u) * (u * (3 * u - 32) + 96) + 2 * s(8 - 2 * u) * s((5 - u) * (u + 6))) / den21
    L[2, 2] = -s(10 - u) * (s(u) * (u * (3 * u - 28) + 76) + 2 * s(2) * s(5 - u) * s(6 - u) * s(16 - u)) / den21
    L[3, 2] = s(u) * (s(10 - u) * ((32 - 3 * u) * u - 96) + 2 * s(8 - 2 * u) * s((5 - u) * (u + 6))) / den21

    L[:, 3] = c4
    return L


def transform_numeric(a, reference: np.ndarray | None = None, gap_tol: float = 1e-8) -> TransformPair:
    """``K`` and ``L`` from a numerical eigen-decomposition.

    Parameters
    ----------
    a : array_like or InverseMasses
        Inverse masses of a 4-particle ring.
    reference : ndarray, optional
        A matrix whose column signs should be matched (typically
        :func:`transform_closed_form` at the same ``u``).  Without it the
        first non-negligible entry of each column is made positive.
    gap_tol : float
        Minimum separation of eigenvalues relative to the largest one.
    """
    am = as_inverse_masses(a)
    if am.n != 4:
        raise InvalidDimensionError("eigenmode transform is implemented for n = 4")
    sq = np.sqrt(am.a)
    res = symmetric_eigen(sq[:, None] * build_coupling(4) * sq[None, :])
    lam = res.eigenvalues
    if np.min(np.abs(np.diff(lam))) < gap_tol * np.abs(lam).max():
        raise DegenerateSpectrumError("eigenvalues of A C collide; modal coordinates are not unique")
    lam = lam.copy()
    lam[np.argmin(np.abs(lam))] = 0.0
    U = canonical_signs(res.U)
    if reference is not None:
        Lref = np.asarray(reference, float)
        flip = np.sign(np.sum((sq[:, None] * U) * Lref, axis=0))
        U = U * np.where(flip == 0, 1.0, flip)
    return TransformPair(U / sq[:, None], sq[:, None] * U, lam, am.a.copy())


def transform_pair(u: float, numeric: bool = False) -> TransformPair:
    """Transform for the branch point ``fiber123(u)``.

    ``numeric=False`` uses the closed-form ``L``; otherwise the numeric
    route is re-signed to agree with it.
    """
    a = fiber123(u).a
    Lc = transform_closed_form(u)
    if numeric:
        tp = transform_numeric(a, reference=Lc)
        return TransformPair(tp.K, tp.L, tp.eigenvalues, tp.a, float(u))
    return TransformPair(Lc / a[:, None], Lc, LAMBDA_123.copy(), a, float(u))


def cubic_from_table(u: float, alpha: float = 1.0) -> CubicCoefficients:
    """Closed-form ``d_1 .. d_10`` on the 1:2:3 branch, scaled by ``alpha``."""
    _check_u(u)
    s = sqrt
    v = 5 - u
    d = np.array([
        s(u) * 27 * s(4 - u) * s(6 - u) * s(10 - u) * (16 - u) * (u + 6) / (35840 * s(35) * v),
        -s(u) * 3 * s(3) * s(10 - u) * s(16 - u) * s(u + 6) * (3 * u**2 - 30 * u + 52) / (4480 * s(70) * v),
        -3 * s(3) * s(4 - u) * s(6 - u) * s(16 - u) * s(u + 6) * (3 * u**2 - 30 * u + 160) / (35840 * s(7) * v),
        -s(u) * s(4 - u) * s(6 - u) * s(10 - u) * (-3 * u**2 + 30 * u + 68) / (1120 * s(35) * v),
        -s(u) * s(4 - u) * s(6 - u) * s(10 - u) * (3 * u**2 - 30 * u + 64) / (7168 * s(35) * v),
        -(-3 * u**4 + 60 * u**3 - 352 * u**2 + 520 * u + 960) / (2240 * s(14) * v),
        s(u) * s(10 - u) * s(16 - u) * (6 - u) * (4 - u) * s(u + 6) / (420 * s(210) * v),
        u * s(4 - u) * s(6 - u) * s(16 - u) * (10 - u) * s(u + 6) / (21504 * s(21) * v),
        -s(u) * s(10 - u) * s(16 - u) * s(u + 6) * (u**2 - 10 * u + 28) / (D9_DENOMINATOR * s(210) * v),
        s(4 - u) * s(6 - u) * s(16 - u) * s(u + 6) * (u**2 - 10 * u + 20) / (1120 * s(21) * v),
    ])
    return CubicCoefficients.from_array(alpha * d, u=float(u), alpha=alpha)


def cubic_tensor(L: np.ndarray) -> np.ndarray:
    """Symmetric tensor ``T_abc = sum_j B_ja B_jb B_jc`` with ``B = (P - I) L``.

    ``(P q)_j = q_{j+1}`` so ``(B x)_j`` is the bond stretch ``q_{j+1} - q_j``.
    """
    L = np.asarray(L, float)
    n = L.shape[0]
    P = np.roll(np.eye(n), 1, axis=1)
    B = (P - np.eye(n)) @ L
    return np.einsum("ja,jb,jc->abc", B, B, B)


def cubic_from_transform(L: np.ndarray, alpha: float = 1.0, tol: float = 1e-10) -> CubicCoefficients:
    """Expand ``(alpha/3) sum (q_{j+1} - q_j)^3`` under ``q = L x``.

    Any coupling to the translation mode ``x_4`` must vanish (it is a
    uniform shift and bond stretches ignore it); otherwise
    :class:`InconsistentTransformError` is raised.
    """
    L = np.asarray(L, float)
    if L.shape != (4, 4):
        raise InvalidDimensionError("L must be 4x4")
    T = cubic_tensor(L)
    leak = np.abs(T[3]).max()
    if leak > tol * max(1.0, np.abs(T).max()):
        raise InconsistentTransformError(f"cubic form couples to the zero mode ({leak:.3e})")
    d = np.array([T[i] for i in _MONO_IDX]) * _MONO_MULT * alpha / 3
    return CubicCoefficients.from_array(d, alpha=alpha)

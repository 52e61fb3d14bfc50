"""Matrices, spectra and algebraic identities of the periodic chain.

The linearized chain of ``n`` particles with inverse masses ``a_j = 1/m_j``
is governed by ``A C`` where ``A = diag(a)`` and ``C`` is the cyclic second
difference matrix.  Everything here is a pure function of its inputs.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import (
    DomainError,
    InvalidDimensionError,
    PreconditionError,
    SingularFormulaError,
)

ZERO_EIG_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class InverseMasses:
    """Positive inverse masses ``a_j = 1/m_j`` of a ring of ``n >= 3`` particles."""

    a: np.ndarray

    def __post_init__(self):
        arr = np.array(self.a, dtype=float).ravel()
        if arr.size < 3:
            raise InvalidDimensionError(f"need at least 3 particles, got {arr.size}")
        if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
            raise DomainError("inverse masses must be finite and positive")
        arr.setflags(write=False)
        object.__setattr__(self, "a", arr)

    @classmethod
    def from_masses(cls, m) -> "InverseMasses":
        m = np.asarray(m, dtype=float)
        if np.any(m <= 0):
            raise DomainError("masses must be positive")
        return cls(1.0 / m)

    @property
    def n(self) -> int:
        return self.a.size

    @property
    def masses(self) -> np.ndarray:
        return 1.0 / self.a

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.a)

    def scaled(self, t: float) -> "InverseMasses":
        return InverseMasses(t * self.a)

    def __repr__(self):
        return f"InverseMasses({np.array2string(self.a, precision=6, separator=', ')})"


def as_inverse_masses(a) -> InverseMasses:
    return a if isinstance(a, InverseMasses) else InverseMasses(a)


def build_coupling(n: int) -> np.ndarray:
    """Cyclic coupling matrix ``C_n``: 2 on the diagonal, -1 on cyclic neighbours."""
    if int(n) != n or n < 3:
        raise InvalidDimensionError(f"coupling matrix needs n >= 3, got {n}")
    n = int(n)
    C = 2.0 * np.eye(n)
    for i in range(n):
        C[i, (i + 1) % n] = -1.0
        C[i, (i - 1) % n] = -1.0
    return C


@dataclass(frozen=True, eq=False)
class SymmetricEigenResult:
    """Eigenvalues (descending) and orthonormal eigenvector columns ``U``."""

    eigenvalues: np.ndarray
    U: np.ndarray


def symmetric_eigen(M, tol: float = 1e-14, max_sweeps: int = 60) -> SymmetricEigenResult:
    """Diagonalize a small symmetric matrix with cyclic Jacobi rotations.

    Sweeps visit the pairs ``(p, q)`` in row order; during the first three
    sweeps rotations are skipped for entries below a threshold, afterwards
    every nonzero off-diagonal entry is annihilated.  Iteration stops when
    the off-diagonal Frobenius norm drops below ``tol * ||M||_F``.

    Parameters
    ----------
    M : array_like, shape (n, n)
        Symmetric matrix (asymmetry above ``1e-12`` relative is rejected).

    Returns
    -------
    SymmetricEigenResult
        Eigenvalues sorted in descending order and the matching columns.
    """
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InvalidDimensionError("matrix must be square")
    scale = max(np.abs(A).max(initial=0.0), 1.0)
    if np.abs(A - A.T).max(initial=0.0) > 1e-12 * scale:
        raise PreconditionError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    n = A.shape[0]
    V = np.eye(n)
    norm = np.linalg.norm(A)
    if norm == 0.0:
        return SymmetricEigenResult(np.zeros(n), V)

    for sweep in range(max_sweeps):
        off = np.sqrt(np.sum(np.triu(A, 1) ** 2) * 2.0)
        if off < tol * norm:
            break
        thresh = 0.2 * off / n**2 if sweep < 3 else 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= thresh or apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p, row_q = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq

    w = np.diag(A).copy()
    order = np.argsort(-w, kind="stable")
    return SymmetricEigenResult(w[order], V[:, order])


def canonical_signs(V: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    """Flip columns so that the first non-negligible component is positive."""
    V = np.array(V, dtype=float)
    for j in range(V.shape[1]):
        col = V[:, j]
        big = np.abs(col) > rtol * np.abs(col).max(initial=0.0)
        if big.any() and col[np.argmax(big)] < 0:
            V[:, j] = -col
    return V


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigen-decomposition of ``A C``; the structural zero mode comes last."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    zero_index: int

    @property
    def positive(self) -> np.ndarray:
        return np.delete(self.eigenvalues, self.zero_index)

    @property
    def frequencies(self) -> np.ndarray:
        return np.sqrt(self.positive)

    def to_dict(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues.tolist(),
            "eigenvectors": self.eigenvectors.tolist(),
            "zero_index": int(self.zero_index),
        }


def spectrum(a) -> Spectrum:
    """Spectrum of ``A C`` for inverse masses ``a``.

    The symmetric matrix ``A^{1/2} C A^{1/2}`` is diagonalized and its
    eigenvectors ``w`` are mapped to eigenvectors ``v = A^{1/2} w`` of
    ``A C``.  Columns are normalized to unit length with the first
    non-negligible entry positive.  The zero eigenvalue is snapped to 0.
    """
    am = as_inverse_masses(a)
    sq = np.sqrt(am.a)
    C = build_coupling(am.n)
    res = symmetric_eigen(sq[:, None] * C * sq[None, :])
    lam = res.eigenvalues.copy()
    lam_max = np.abs(lam).max()
    k = int(np.argmin(np.abs(lam)))
    if abs(lam[k]) >= ZERO_EIG_RTOL * lam_max or np.sum(np.abs(lam) < ZERO_EIG_RTOL * lam_max) != 1:
        raise PreconditionError("expected exactly one zero eigenvalue")
    lam[k] = 0.0
    V = sq[:, None] * res.U
    V /= np.linalg.norm(V, axis=0)
    order = [i for i in range(am.n) if i != k] + [k]
    return Spectrum(lam[order], canonical_signs(V[:, order]), am.n - 1)


def char_poly_identities(a) -> tuple[float, float]:
    """Return ``(p_{n-1}, p_{n-2})``, the two top characteristic-polynomial invariants.

    ``p_{n-1} = 2 sum a_i`` and ``p_{n-2} = sum_{i<j} c_ij a_i a_j`` with
    ``c_ij = 3`` for cyclic neighbours and 4 otherwise.  They equal the
    first two elementary symmetric functions of the positive eigenvalues.
    Works with :class:`fractions.Fraction` entries for exact evaluation.
    """
    vals = list(a.a) if isinstance(a, InverseMasses) else list(a)
    n = len(vals)
    if n < 3:
        raise InvalidDimensionError("need n >= 3")
    p1 = 2 * sum(vals)
    p2 = 0
    for i, j in combinations(range(n), 2):
        c = 3 if (j - i) % n in (1, n - 1) else 4
        p2 += c * vals[i] * vals[j]
    return p1, p2


def eigenvector_closed_form(a, lam: float, rtol: float = 1e-10) -> np.ndarray:
    """Closed-form eigenvector of ``A_4 C_4`` for a known eigenvalue ``lam``.

    With ``mu_j = 1 / (2 - lam / a_j)`` the vector
    ``(mu_1 (mu_2 + mu_4), mu_2, mu_3 (mu_2 + mu_4), mu_4)`` solves
    ``A C v = lam v``.  Raises :class:`SingularFormulaError` when
    ``lam = 2 a_j`` for some ``j``.
    """
    am = as_inverse_masses(a)
    if am.n != 4:
        raise InvalidDimensionError("closed-form eigenvector exists for n = 4 only")
    x = am.a
    if np.any(np.abs(lam - 2 * x) <= rtol * np.maximum(abs(lam), 2 * x)):
        raise SingularFormulaError("lambda equals 2 a_j; use symmetric_eigen instead")
    mu = 1.0 / (2.0 - lam / x)
    return np.array([mu[0] * (mu[1] + mu[3]), mu[1], mu[2] * (mu[1] + mu[3]), mu[3]])


def momentum(a, qdot) -> float:
    """Total momentum ``sum m_j qdot_j``."""
    am = as_inverse_masses(a)
    qdot = np.asarray(qdot, dtype=float)
    if qdot.shape != (am.n,):
        raise InvalidDimensionError("velocity length does not match chain length")
    return float(np.sum(qdot / am.a))


def _cycle_name(perm) -> str:
    seen, cycles = set(), []
    for start in range(len(perm)):
        if start in seen:
            continue
        cyc, i = [], start
        while i not in seen:
            seen.add(i)
            cyc.append(i + 1)
            i = perm[i]
        if len(cyc) > 1:
            cycles.append("(" + "".join(map(str, cyc)) + ")")
    return "".join(cycles) or "e"


def dihedral_elements(n: int) -> list[tuple[str, tuple[int, ...]]]:
    """Elements of ``D_n`` as ``(name, perm)``; ``(g a)_i = a[perm[i]]``.

    Rotations come first (identity at index 0), then reflections.
    """
    elems = []
    for k in range(n):
        elems.append(tuple((i + k) % n for i in range(n)))
    for k in range(n):
        elems.append(tuple((k - i) % n for i in range(n)))
    return [(_cycle_name(p), p) for p in elems]


def dihedral_orbit(a) -> list[tuple[float, ...]]:
    """Distinct images of ``a`` under cyclic shifts and reflections.

    Duplicates are removed by exact float equality, so callers that need
    fuzzy identification must round first.  Order follows
    :func:`dihedral_elements`.
    """
    vals = np.asarray(a.a if isinstance(a, InverseMasses) else a, dtype=float)
    out, seen = [], set()
    for _, perm in dihedral_elements(vals.size):
        img = tuple(float(vals[p]) for p in perm)
        if img not in seen:
            seen.add(img)
            out.append(img)
    return out

"""Inverse spectral problem for the four-particle ring.

Given positive eigenvalues ``lam_1 + lam_2 + lam_3 = 1`` of ``A_4 C_4`` the
*fiber* is the set of positive inverse-mass vectors realizing them.  It is
cut out by

    4 e_3(a) = xi,   3 (a1 a2 + a2 a3 + a3 a4 + a4 a1) + 4 (a1 a3 + a2 a4) = eta,
    2 (a1 + a2 + a3 + a4) = 1,

with ``xi = e_3(lam)`` and ``eta = e_2(lam)``.  Solutions are parametrized by
``eta2 = (a1 + a3)(a2 + a4)`` in ``(0, 1/16)``; for each ``eta2`` at most one
point lies in the fundamental domain ``a1 + a3 <= a2 + a4``, ``a1 <= a3``,
``a2 <= a4`` of the dihedral group ``D_4``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from .errors import DomainError, IncompleteSchemeError, PreconditionError
from .lattice import InverseMasses, dihedral_elements

#: right end of the 1:2:3 branch parameter, where ``a_1 -> 0``
U1 = 8.0 / 3.0 - (2.0 / 3.0) * 19.0 ** (1.0 / 3.0)

EXCEPTIONAL_ATOL = 1e-12
OPEN_ATOL = 1e-9
_D4 = dihedral_elements(4)


@dataclass(frozen=True)
class ResonanceRatio:
    """Frequency ratio ``n1:n2:n3``, gcd-reduced and sorted ascending."""

    n1: int
    n2: int
    n3: int

    def __post_init__(self):
        vals = (self.n1, self.n2, self.n3)
        if any(int(v) != v or v <= 0 for v in vals):
            raise DomainError(f"resonance entries must be positive integers, got {vals}")
        g = math.gcd(*map(int, vals))
        s = sorted(int(v) // g for v in vals)
        object.__setattr__(self, "n1", s[0])
        object.__setattr__(self, "n2", s[1])
        object.__setattr__(self, "n3", s[2])

    @classmethod
    def parse(cls, text: str) -> "ResonanceRatio":
        parts = text.replace(",", ":").split(":")
        if len(parts) != 3:
            raise DomainError(f"expected a ratio like 1:2:3, got {text!r}")
        return cls(*(int(p) for p in parts))

    def __str__(self):
        return f"{self.n1}:{self.n2}:{self.n3}"


@dataclass(frozen=True)
class TargetSpectrum:
    """Positive eigenvalues in descending order, normalized to sum 1.

    Entries may be :class:`fractions.Fraction` for exact arithmetic.
    """

    lam1: float
    lam2: float
    lam3: float

    @classmethod
    def from_eigenvalues(cls, values) -> "TargetSpectrum":
        vals = list(values)
        if len(vals) != 3 or any(v <= 0 for v in vals):
            raise DomainError("need three positive eigenvalues")
        total = sum(vals)
        vals = sorted((v / total for v in vals), reverse=True)
        return cls(*vals)

    @property
    def values(self) -> tuple:
        return (self.lam1, self.lam2, self.lam3)

    @property
    def xi(self):
        return self.lam1 * self.lam2 * self.lam3

    @property
    def eta(self):
        return self.lam1 * self.lam2 + self.lam2 * self.lam3 + self.lam3 * self.lam1


def target_spectrum(r: ResonanceRatio, exact: bool = False) -> TargetSpectrum:
    """Eigenvalues ``n_i^2 / sum n_j^2`` of a resonance, largest first."""
    sq = [r.n1**2, r.n2**2, r.n3**2]
    total = sum(sq)
    if exact:
        vals = [Fraction(s, total) for s in sq]
    else:
        vals = [s / total for s in sq]
    return TargetSpectrum(*sorted(vals, reverse=True))


def xi_eta(t: TargetSpectrum):
    """Elementary symmetric values ``(xi, eta) = (e_3, e_2)`` of the target."""
    return t.xi, t.eta


def boundary_polynomial(xi, eta):
    """``T(xi, eta) = 27 xi^2 + 4 eta^3 - 18 xi eta - eta^2 + 4 xi``.

    ``T = 0`` exactly when two target eigenvalues coincide.
    """
    return 27 * xi**2 + 4 * eta**3 - 18 * xi * eta - eta**2 + 4 * xi


def noncompact_polynomial(xi, eta):
    """Left-hand side of the non-compactness condition (``<= 0`` means open fibers)."""
    return 8 * xi**2 + eta**3 - 5 * xi * eta - Fraction(1, 4) * eta**2 + Fraction(9, 8) * xi


@dataclass(frozen=True)
class RegionReport:
    xi: float
    eta: float
    T: float
    in_image: bool
    nonempty: bool
    compact: bool
    on_exceptional_line: bool


def region_tests(xi, eta, atol: float = 1e-14) -> RegionReport:
    """Which region of the ``(xi, eta)`` plane a target lies in.

    ``in_image``: the pair comes from some positive eigenvalue triple.
    ``nonempty``: some positive inverse-mass vector realizes it.
    ``compact``: the fiber is nonempty and compact.
    ``on_exceptional_line``: ``eta = 4 xi + 3/16`` where the parametrization
    by ``eta2`` is incomplete.

    Exact (:class:`~fractions.Fraction`) inputs are evaluated exactly;
    float inputs allow ``atol`` slack on the polynomial inequalities.
    """
    if xi <= 0 or eta <= 0:
        raise DomainError("xi and eta must be positive")
    exact = isinstance(xi, Fraction) and isinstance(eta, Fraction)
    tol = 0 if exact else atol
    T = boundary_polynomial(xi, eta)
    in_image = xi <= Fraction(1, 27) + tol and eta <= Fraction(1, 3) + tol and T <= tol
    nonempty = xi <= Fraction(1, 32) + tol and eta <= 2 * xi + Fraction(1, 4) + tol and T <= tol
    noncompact = (
        xi < Fraction(1, 32)
        and eta < Fraction(5, 16)
        and noncompact_polynomial(xi, eta) <= tol
    )
    on_line = abs(eta - 4 * xi - Fraction(3, 16)) < EXCEPTIONAL_ATOL
    return RegionReport(xi, eta, T, bool(in_image), bool(nonempty),
                        bool(nonempty and not noncompact), bool(on_line))


def _check_exceptional(xi, eta):
    if abs(eta - 4 * xi - 3 / 16) < EXCEPTIONAL_ATOL:
        raise IncompleteSchemeError(
            "target lies on eta = 4 xi + 3/16; the eta2 parametrization misses solutions there"
        )


@dataclass(frozen=True)
class FiberParams:
    """Intermediate invariants of the scheme at one value of ``eta2``."""

    xi: float
    eta: float
    eta2: float
    eta1: float
    w: float
    s13: float
    s24: float
    p13: float
    p24: float
    d13: float
    d24: float


def fiber_params(xi, eta, eta2) -> FiberParams:
    """Evaluate ``eta1, s13, s24, p13, p24`` and the discriminants at ``eta2``."""
    if not 0 < eta2 < 1 / 16:
        raise DomainError("eta2 must lie in (0, 1/16)")
    w = math.sqrt(1 - 16 * eta2)
    eta1 = (eta - 3 * eta2) / 4
    s13, s24 = (1 - w) / 4, (1 + w) / 4
    p13 = (xi / 4 - s13 * eta1) / (w / 2)
    p24 = eta1 - p13
    return FiberParams(xi, eta, eta2, eta1, w, s13, s24, p13, p24,
                       s13**2 - 4 * p13, s24**2 - 4 * p24)


def _constraint_polys(xi, eta) -> dict[str, Polynomial]:
    """Admissibility quantities as cubics in ``w = sqrt(1 - 16 eta2)``.

    Each polynomial has the sign of the corresponding quantity for
    ``0 < w < 1`` (``p13``, ``p24``, ``d13``, ``d24`` are multiplied by ``w``).
    """
    W = Polynomial([0.0, 1.0])
    s13 = Polynomial([0.25, -0.25])
    s24 = Polynomial([0.25, 0.25])
    eta1 = Polynomial([eta / 4 - 3 / 64, 0.0, 3 / 64])
    numer = xi / 4 - s13 * eta1
    return {
        "eta1": eta1,
        "p13": 2 * numer,
        "p24": W * eta1 - 2 * numer,
        "d13": W * s13**2 - 8 * numer,
        "d24": W * s24**2 - 4 * W * eta1 + 8 * numer,
    }


def _w_of(eta2):
    return np.sqrt(1 - 16 * np.asarray(eta2, dtype=float))


def _stabilizer(a, rtol=1e-12) -> str:
    a = np.asarray(a)
    tol = rtol * np.abs(a).max()
    names = [name for name, perm in _D4 if np.abs(a[list(perm)] - a).max() <= tol]
    return ",".join(names)


@dataclass(frozen=True, eq=False)
class FiberPoint:
    """A positive inverse-mass vector on a fiber.

    ``parameter`` is the value of ``parameter_name`` (``"eta2"`` or ``"u"``)
    that produced it; ``symmetry_stabilizer`` lists the ``D_4`` elements
    (cycle notation on positions 1..4) fixing ``a``.
    """

    a: np.ndarray
    parameter: float
    parameter_name: str = "eta2"
    symmetry_stabilizer: str = "e"

    @property
    def inverse_masses(self) -> InverseMasses:
        return InverseMasses(self.a)

    def to_dict(self) -> dict:
        return {
            "a": self.a.tolist(),
            "parameter": self.parameter,
            "parameter_name": self.parameter_name,
            "stabilizer": self.symmetry_stabilizer,
        }


def _point(params: FiberParams, scale=1.0, clamp=0.0):
    d13, d24 = params.d13, params.d24
    if -clamp <= d13 < 0:
        d13 = 0.0
    if -clamp <= d24 < 0:
        d24 = 0.0
    if params.eta1 <= 0 or params.p13 <= 0 or params.p24 <= 0 or d13 < 0 or d24 < 0:
        return None
    r13, r24 = math.sqrt(d13), math.sqrt(d24)
    a = np.array([params.s13 - r13, params.s24 - r24, params.s13 + r13, params.s24 + r24]) / 2
    if np.any(a <= 0):
        return None
    return FiberPoint(scale * a, params.eta2, "eta2", _stabilizer(a))


def solve_fiber_at(xi, eta, eta2, scale: float = 1.0, clamp: float = 1e-14) -> list[FiberPoint]:
    """Fundamental-domain fiber points at a given ``eta2``.

    Returns an empty list when some intermediate quantity is not admissible
    (negative ``p13``/``p24`` or negative discriminants).  Discriminants in
    ``[-clamp, 0)`` are treated as zero.
    """
    _check_exceptional(xi, eta)
    pt = _point(fiber_params(xi, eta, eta2), scale, clamp)
    return [] if pt is None else [pt]


@dataclass(eq=False)
class FiberBranch:
    """A connected ``eta2`` interval of fundamental-domain solutions.

    ``lo_kind``/``hi_kind`` name the quantity vanishing at each end:
    ``d13`` (``a1 = a3``) and ``d24`` (``a2 = a4``) are closed ends that
    glue to a mirror image; ``p13``, ``p24``, ``eta1`` mark ends where a
    coordinate tends to zero, so the curve is open there.
    """

    xi: float
    eta: float
    lo: float
    hi: float
    lo_kind: str
    hi_kind: str
    orbit_size: int = 8

    @property
    def lo_closed(self) -> bool:
        return self.lo_kind in ("d13", "d24")

    @property
    def hi_closed(self) -> bool:
        return self.hi_kind in ("d13", "d24")

    def point(self, eta2, clamp: float = 1e-12) -> FiberPoint | None:
        return _point(fiber_params(self.xi, self.eta, eta2), clamp=clamp)

    def endpoint(self, which: str) -> np.ndarray:
        """Coordinates at an end; open ends give the limiting boundary point."""
        eta2 = self.lo if which == "lo" else self.hi
        p = fiber_params(self.xi, self.eta, eta2)
        d13, d24 = max(p.d13, 0.0), max(p.d24, 0.0)
        return np.array([p.s13 - math.sqrt(d13), p.s24 - math.sqrt(d24),
                         p.s13 + math.sqrt(d13), p.s24 + math.sqrt(d24)]) / 2

    def sample(self, k: int = 100, include_ends: bool = True) -> list[FiberPoint]:
        """``k`` points spread over the interval (open ends are excluded)."""
        lo, hi = self.lo, self.hi
        grid = np.linspace(lo, hi, k + 2)
        grid = grid[1:-1] if k > 0 else grid[:0]
        if include_ends:
            ends = ([lo] if self.lo_closed else []) + list(grid) + ([hi] if self.hi_closed else [])
            grid = np.array(ends)
        pts = [self.point(g) for g in grid]
        return [p for p in pts if p is not None]

    def to_dict(self) -> dict:
        return {"eta2_lo": self.lo, "eta2_hi": self.hi, "lo_kind": self.lo_kind,
                "hi_kind": self.hi_kind, "lo_closed": self.lo_closed,
                "hi_closed": self.hi_closed, "orbit_size": self.orbit_size}


@dataclass(eq=False)
class FiberClassification:
    """Shape of a whole fiber (all ``D_4`` images).

    ``kind`` is one of ``"Empty"``, ``"FinitePoints"``, ``"OpenCurves"``,
    ``"CompactCurves"``; ``count`` is the number of points or curves.
    """

    kind: str
    count: int
    branches: list[FiberBranch] = field(default_factory=list)
    points: list[FiberPoint] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "count": self.count,
                "branches": [b.to_dict() for b in self.branches],
                "points": [p.to_dict() for p in self.points]}


def _refine(poly: Polynomial, e_in, e_out):
    """Root of ``poly(w(eta2))`` between a valid and an invalid grid node."""
    f = lambda e: poly(math.sqrt(1 - 16 * e))
    if f(e_out) == 0.0:
        return e_out
    return brentq(f, min(e_in, e_out), max(e_in, e_out), xtol=1e-17, rtol=1e-15, maxiter=200)


def _boundary(polys, e_in, e_out):
    """Locate the admissibility boundary between two grid nodes."""
    w_out = math.sqrt(1 - 16 * e_out)
    best, kind = None, None
    for name, poly in polys.items():
        bad = poly(w_out) < 0 if name in ("d13", "d24") else poly(w_out) <= 0
        if not bad:
            continue
        root = _refine(poly, e_in, e_out)
        if best is None or abs(root - e_in) < abs(best - e_in):
            best, kind = root, name
    return best, kind


def _isolated_points(xi, eta, polys, valid_intervals):
    """Points where a discriminant touches zero from below (double root in w)."""
    found = []
    for name in ("d13", "d24"):
        poly = polys[name]
        scale = np.abs(poly.coef).max()
        for wc in poly.deriv().roots():
            if abs(wc.imag) > 1e-12 or not 0 < wc.real < 1:
                continue
            wc = wc.real
            if abs(poly(wc)) > 1e-12 * scale:
                continue
            eta2 = (1 - wc * wc) / 16
            if any(lo <= eta2 <= hi for lo, hi in valid_intervals):
                continue
            pt = _point(fiber_params(xi, eta, eta2), clamp=1e-12 * scale)
            if pt is not None and not any(np.allclose(pt.a, q.a, atol=1e-12) for q in found):
                found.append(pt)
    return found


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, i):
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def _orbit_points(a, decimals=10):
    keys, out = set(), []
    for _, perm in _D4:
        img = a[list(perm)]
        key = tuple(np.round(img, decimals))
        if key not in keys:
            keys.add(key)
            out.append(img)
    return out


def _count_curves(branches):
    """Glue ``D_4`` images of the branches at shared closed endpoints."""
    arcs = []  # (mid key, lo point or None, hi point or None)
    keys = set()
    for br in branches:
        mid = br.point(0.5 * (br.lo + br.hi)).a
        lo_pt = br.endpoint("lo") if br.lo_closed else None
        hi_pt = br.endpoint("hi") if br.hi_closed else None
        for _, perm in _D4:
            idx = list(perm)
            key = tuple(np.round(mid[idx], 9))
            if key in keys:
                continue
            keys.add(key)
            arcs.append((None if lo_pt is None else lo_pt[idx],
                         None if hi_pt is None else hi_pt[idx]))
    uf = _UnionFind(len(arcs))
    ends = [(i, p) for i, (lo, hi) in enumerate(arcs) for p in (lo, hi) if p is not None]
    for x in range(len(ends)):
        for y in range(x + 1, len(ends)):
            if np.abs(ends[x][1] - ends[y][1]).max() < 1e-8:
                uf.union(ends[x][0], ends[y][0])
    comps: dict[int, bool] = {}
    for i, (lo, hi) in enumerate(arcs):
        root = uf.find(i)
        comps[root] = comps.get(root, False) or lo is None or hi is None
    n_open = sum(comps.values())
    return len(comps), n_open


def fiber_classify(xi, eta, grid: int = 10_000) -> FiberClassification:
    """Determine all fundamental branches and isolated points of a fiber.

    ``eta2`` is sampled on ``grid`` interior nodes of ``(0, 1/16)``; every
    change of admissibility is refined by bracketing to machine precision.
    Isolated points are the double roots (in ``w``) of ``d13`` or ``d24``.
    Curves are counted after gluing the ``D_4`` images of each branch at
    endpoints with ``a1 = a3`` or ``a2 = a4``; a curve is open if one of its
    arcs ends where a coordinate vanishes.
    """
    xi, eta = float(xi), float(eta)
    if xi <= 0 or eta <= 0:
        raise DomainError("xi and eta must be positive")
    # degenerate quadric: only the equal-mass point can satisfy the quadratic constraint
    if eta >= 5 / 16 - EXCEPTIONAL_ATOL:
        if abs(eta - 5 / 16) < EXCEPTIONAL_ATOL and abs(xi - 1 / 32) < EXCEPTIONAL_ATOL:
            a = np.full(4, 1 / 8)
            return FiberClassification("FinitePoints", 1, [], [FiberPoint(a, float("nan"), "eta2", _stabilizer(a))])
        return FiberClassification("Empty", 0)
    _check_exceptional(xi, eta)

    polys = _constraint_polys(xi, eta)
    etas = np.linspace(0.0, 1 / 16, grid + 2)[1:-1]
    w = _w_of(etas)
    valid = np.ones_like(etas, dtype=bool)
    for name, poly in polys.items():
        vals = poly(w)
        valid &= vals >= 0 if name in ("d13", "d24") else vals > 0

    branches = []
    idx = np.flatnonzero(valid)
    if idx.size:
        runs = np.split(idx, np.flatnonzero(np.diff(idx) > 1) + 1)
        for run in runs:
            i0, i1 = run[0], run[-1]
            if i0 == 0:
                lo, lo_kind = 0.0, "eta2"
            else:
                lo, lo_kind = _boundary(polys, etas[i0], etas[i0 - 1])
            if i1 == etas.size - 1:
                hi, hi_kind = 1 / 16, "w"
            else:
                hi, hi_kind = _boundary(polys, etas[i1], etas[i1 + 1])
            br = FiberBranch(xi, eta, lo, hi, lo_kind, hi_kind)
            mid = br.point(0.5 * (lo + hi))
            br.orbit_size = 8 // len(mid.symmetry_stabilizer.split(","))
            branches.append(br)

    intervals = [(b.lo, b.hi) for b in branches]
    points = _isolated_points(xi, eta, polys, intervals)

    if branches:
        n_curves, n_open = _count_curves(branches)
        kind = "OpenCurves" if n_open else "CompactCurves"
        return FiberClassification(kind, n_curves, branches, points)
    if points:
        n_pts = sum(len(_orbit_points(p.a)) for p in points)
        return FiberClassification("FinitePoints", n_pts, [], points)
    return FiberClassification("Empty", 0)


def classify_resonance(r: ResonanceRatio | str, grid: int = 10_000) -> FiberClassification:
    if isinstance(r, str):
        r = ResonanceRatio.parse(r)
    xi, eta = xi_eta(target_spectrum(r))
    return fiber_classify(xi, eta, grid)


def eta2_from_u(u):
    """1:2:3 branch parameter ``u`` to ``eta2`` via ``sqrt(1 - 16 eta2) = (5 - u) / 7``."""
    return (1 - ((5 - u) / 7) ** 2) / 16


def u_from_eta2(eta2):
    return 5 - 7 * math.sqrt(1 - 16 * eta2)


def fiber123(u: float, scale: float = 1.0) -> FiberPoint:
    """Closed-form fundamental branch of the 1:2:3 fiber.

    Valid for ``0 <= u < U1``; ``u = 0`` is the symmetric point ``a1 = a3``
    and ``a1 -> 0`` as ``u -> U1``.  The spectrum of ``A C`` is
    ``(9/14, 2/7, 1/14, 0)`` (times ``scale``).
    """
    if not 0 <= u < U1:
        raise DomainError(f"u must lie in [0, {U1:.6f})")
    r13 = math.sqrt(2) / 112 * math.sqrt(u * (6 - u) * (16 - u) / (5 - u))
    r24 = 1 / (56 * math.sqrt(2)) * math.sqrt((6 + u) * (4 - u) * (10 - u) / (5 - u))
    a = np.array([(2 + u) / 56 - r13, (12 - u) / 56 - r24, (2 + u) / 56 + r13, (12 - u) / 56 + r24])
    return FiberPoint(scale * a, float(u), "u", _stabilizer(a))


@dataclass(frozen=True)
class SphericalCoords:
    phi: float
    psi: float
    rho: float
    x1: float
    x2: float
    x3: float


def spherical_coords(p) -> SphericalCoords:
    """Azimuth/inclination of a fiber point on its ellipsoid.

    ``x1 = (-a1 + a2 - a3 + a4)/2``, ``x2 = (a4 - a2)/sqrt 2``,
    ``x3 = (a3 - a1)/sqrt 2`` lie on ``x1^2 + 2 x2^2 + 2 x3^2 = rho^2``
    with ``rho^2 = 5/16 - eta``.
    """
    a = np.asarray(p.a if isinstance(p, (FiberPoint, InverseMasses)) else p, dtype=float)
    if a.shape != (4,):
        raise DomainError("spherical coordinates need a 4-vector")
    if abs(2 * a.sum() - 1) > 1e-9:
        raise PreconditionError("point must satisfy 2 * sum(a) = 1")
    x1 = (-a[0] + a[1] - a[2] + a[3]) / 2
    x2 = (a[3] - a[1]) / math.sqrt(2)
    x3 = (a[2] - a[0]) / math.sqrt(2)
    rho = math.sqrt(x1 * x1 + 2 * x2 * x2 + 2 * x3 * x3)
    if rho < 1e-15:
        raise DomainError("angles are undefined at the equal-mass point")
    psi = math.asin(max(-1.0, min(1.0, x1 / rho)))
    phi = math.atan2(x3, x2)
    return SphericalCoords(phi, psi, rho, x1, x2, x3)

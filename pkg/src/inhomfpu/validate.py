"""Cross-checks between independent computation routes.

:func:`run_validation` is what ``inhomfpu validate`` executes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fiber import classify_resonance, fiber123
from .lattice import build_coupling, spectrum
from .normalform import normal_mode_stability
from .transform import LAMBDA_123, cubic_from_table, cubic_from_transform, transform_pair

#: fiber shapes established by this package (full D4 orbits counted)
EXPECTED_FIBERS = {
    "1:1:2": ("FinitePoints", 4), "1:2:2": ("Empty", 0), "1:2:3": ("OpenCurves", 4),
    "1:2:4": ("OpenCurves", 12), "1:1:1": ("Empty", 0), "1:1:3": ("FinitePoints", 4),
    "1:2:5": ("OpenCurves", 12), "1:2:6": ("OpenCurves", 12), "1:3:3": ("Empty", 0),
    "1:3:4": ("OpenCurves", 4), "1:3:5": ("OpenCurves", 4), "1:3:6": ("OpenCurves", 12),
    "1:3:7": ("OpenCurves", 12), "1:3:9": ("OpenCurves", 12), "2:3:4": ("CompactCurves", 2),
    "2:3:6": ("CompactCurves", 4),
}

CASE_U = (0.0, 0.534105, 0.826713)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _spectrum_roundtrip():
    err = max(np.abs(spectrum(fiber123(u).a).positive - LAMBDA_123[:3]).max() for u in CASE_U)
    return Check("spectrum round-trip on the 1:2:3 branch", err < 1e-10, f"max error {err:.2e}")


def _transform_identities(n=50):
    C = build_coupling(4)
    worst = 0.0
    for u in np.linspace(0, 0.85, n):
        for numeric in (False, True):
            tp = transform_pair(u, numeric=numeric)
            A = np.diag(tp.a)
            worst = max(worst, np.abs(tp.K.T @ A @ tp.K - np.eye(4)).max(),
                        np.abs(tp.L.T @ C @ tp.L - np.diag(LAMBDA_123)).max())
    return Check("K^T A K = I and L^T C L = Lambda", worst < 1e-10, f"max error {worst:.2e}")


def _cubic_cross(n=50):
    worst = 0.0
    for u in np.linspace(0, 0.85, n):
        a = cubic_from_table(u).as_array()
        b = cubic_from_transform(transform_pair(u, numeric=True).L).as_array()
        worst = max(worst, np.abs(a - b).max())
    return Check("closed-form cubic coefficients vs expansion", worst < 1e-10, f"max error {worst:.2e}")


def _fibers():
    bad = []
    for ratio, (kind, count) in EXPECTED_FIBERS.items():
        c = classify_resonance(ratio)
        if (c.kind, c.count) != (kind, count):
            bad.append(f"{ratio}: {c.kind}({c.count})")
    return Check("resonance fiber classification", not bad, "; ".join(bad) or f"{len(EXPECTED_FIBERS)} ratios")


def _stability():
    got = []
    for u in CASE_U:
        d = cubic_from_table(u)
        got.append((normal_mode_stability(1, d.d6, d.d9).classification,
                    normal_mode_stability(2, d.d6, d.d9).classification))
    ok = got == [("HH", "EE"), ("HH", "C"), ("HH", "C")]
    return Check("normal-mode stability classes", ok, str(got))


CHECKS = (_spectrum_roundtrip, _transform_identities, _cubic_cross, _fibers, _stability)


def run_validation() -> list[Check]:
    return [check() for check in CHECKS]

"""Smoothing by convolution against a mollifier, via adaptive quadrature.

This is the numerical route that independently cross-checks every closed
form in ``activations``: a mollifier (smooth, nonnegative, unit mass) is
rescaled to concentration n and convolved with an arbitrary function by
adaptive quadrature. Nothing here calls the closed forms.
"""

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .scalar_math import gaussian_pdf

__all__ = [
    "Mollifier", "QuadratureSpec", "MollifierReport",
    "BudgetExceeded", "MollifierInvalid",
    "gaussian_mollifier", "bump_mollifier", "broken_double_mass_mollifier",
    "scale_mollifier", "convolve_at", "smoothed_function", "check_mollifier",
]

# Radius beyond which the standard Gaussian carries < 1e-18 mass
# (2*Phi(-9) ~ 2.26e-19), far below every tolerance used here.
GAUSSIAN_SUPPORT_RADIUS = 9.0

MASS_TOLERANCE = 1e-10
LEAK_TOLERANCE = 1e-12
MIN_DENSITY_SAMPLES = 2001


class BudgetExceeded(RuntimeError):
    """Quadrature could not reach the requested tolerance within the
    subdivision budget; carries the achieved error estimate."""

    def __init__(self, message, achieved_error, requested_tolerance):
        super().__init__(message)
        self.achieved_error = achieved_error
        self.requested_tolerance = requested_tolerance


class MollifierInvalid(ValueError):
    """A mollifier axiom failed; ``axiom`` names which one."""

    def __init__(self, message, axiom, report):
        super().__init__(message)
        self.axiom = axiom
        self.report = report


@dataclass(frozen=True)
class Mollifier:
    """A smoothing density: nonnegative, unit mass, and carrying less than
    1e-16 of its mass outside [-effective_support, effective_support]."""

    density: Callable[[float], float]
    effective_support: float
    name: str


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tolerance: float = 1e-10
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.abs_tolerance > 0.0:
            raise ValueError(f"abs_tolerance must be > 0, got {self.abs_tolerance!r}")
        if self.max_subdivisions < 1:
            raise ValueError(f"max_subdivisions must be >= 1, got {self.max_subdivisions!r}")


@dataclass(frozen=True)
class MollifierReport:
    """Measured diagnostics: total mass, sampled minimum density, and mass
    outside the effective support."""

    mass: float
    min_density: float
    support_leak: float


def gaussian_mollifier() -> Mollifier:
    return Mollifier(gaussian_pdf, GAUSSIAN_SUPPORT_RADIUS, "gaussian")


def _bump_raw(y: float) -> float:
    u = 1.0 - y * y
    if u <= 0.0:
        return 0.0
    return math.exp(-1.0 / u)


_bump_norm_cache = None


def _bump_norm() -> float:
    # 1 / integral of e^{-1/(1-y^2)} over (-1, 1); computed once
    global _bump_norm_cache
    if _bump_norm_cache is None:
        total, _ = integrate.quad(_bump_raw, -1.0, 1.0, epsabs=1e-14,
                                  epsrel=1e-13, limit=200)
        _bump_norm_cache = 1.0 / total
    return _bump_norm_cache


def bump_mollifier() -> Mollifier:
    """Compactly supported bump c * e^{-1/(1-y^2)} on (-1, 1), zero outside,
    with c normalizing to unit mass."""
    c = _bump_norm()

    def density(y: float) -> float:
        return c * _bump_raw(y)

    return Mollifier(density, 1.0, "bump")


def broken_double_mass_mollifier() -> Mollifier:
    """Deliberately invalid density (mass 2): exercises the failure path of
    check_mollifier and the verify CLI."""
    return Mollifier(lambda y: 2.0 * gaussian_pdf(y),
                     GAUSSIAN_SUPPORT_RADIUS, "broken_double_mass")


def scale_mollifier(m: Mollifier, n: float) -> Mollifier:
    """Concentrate a mollifier: density y -> n * density(n*y), support R/n.

    Unit mass is preserved by the change of variables.
    """
    if not n > 0.0:
        raise ValueError(f"scaling factor must be > 0, got {n!r}")
    base = m.density

    def density(y: float) -> float:
        return n * base(n * y)

    return Mollifier(density, m.effective_support / n, f"{m.name}_x{n:g}")


def _quad_panel(h, lo, hi, epsabs, limit):
    # scipy.integrate.quad warns instead of raising when the budget is hit;
    # collect the estimate silently and let the caller decide.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        result, abserr = integrate.quad(h, lo, hi, epsabs=epsabs,
                                        epsrel=0.0, limit=limit)[:2]
    return result, abserr


def convolve_at(f, m: Mollifier, x: float,
                q: QuadratureSpec = QuadratureSpec()) -> float:
    """(f * m)(x) = integral of f(x - y) m.density(y) dy over the support.

    The window is split at y = x (the image of a kink of f at 0) so a
    piecewise-smooth f is smooth on each panel.
    """
    r = m.effective_support

    def h(y):
        return f(x - y) * m.density(y)

    if -r < x < r:
        panels = [(-r, x), (x, r)]
    else:
        panels = [(-r, r)]
    per_panel = q.abs_tolerance / len(panels)

    total = 0.0
    err = 0.0
    for lo, hi in panels:
        value, abserr = _quad_panel(h, lo, hi, per_panel, q.max_subdivisions)
        total += value
        err += abserr
    if err > q.abs_tolerance:
        raise BudgetExceeded(
            f"quadrature reached error estimate {err:.3e} "
            f"(> requested {q.abs_tolerance:.3e}) within "
            f"{q.max_subdivisions} subdivisions", err, q.abs_tolerance)
    return total


def smoothed_function(f, m: Mollifier, n: float,
                      q: QuadratureSpec = QuadratureSpec()):
    """x -> (f * m_n)(x) where m_n is m concentrated by factor n."""
    scaled = scale_mollifier(m, n)

    def smoothed(x: float) -> float:
        return convolve_at(f, scaled, x, q)

    return smoothed


def check_mollifier(m: Mollifier,
                    q: QuadratureSpec = QuadratureSpec()) -> MollifierReport:
    """Measure the mollifier axioms; raise MollifierInvalid on any failure.

    Checks: unit mass within 1e-10, nonnegative density on a sampled grid,
    and mass outside the effective support below 1e-12.
    """
    r = m.effective_support
    mass = 0.0
    for lo, hi in [(-r, 0.0), (0.0, r)]:
        value, _ = _quad_panel(m.density, lo, hi, q.abs_tolerance / 2.0,
                               q.max_subdivisions)
        mass += value

    grid = np.linspace(-r, r, MIN_DENSITY_SAMPLES)
    min_density = min(m.density(float(y)) for y in grid)

    leak = 0.0
    for lo, hi in [(r, math.inf), (-math.inf, -r)]:
        value, _ = _quad_panel(m.density, lo, hi, q.abs_tolerance / 2.0,
                               q.max_subdivisions)
        leak += value

    report = MollifierReport(mass, min_density, leak)
    if abs(mass - 1.0) > MASS_TOLERANCE:
        raise MollifierInvalid(
            f"{m.name}: unit-mass axiom failed (measured mass {mass!r})",
            "mass", report)
    if min_density < 0.0:
        raise MollifierInvalid(
            f"{m.name}: nonnegativity axiom failed "
            f"(sampled density {min_density!r})", "nonnegative", report)
    if leak >= LEAK_TOLERANCE:
        raise MollifierInvalid(
            f"{m.name}: support axiom failed "
            f"(mass {leak!r} outside +-{r!r})", "support", report)
    return report

"""Closed-form smoothed activation (three variants) plus baseline kinds.

The smoothed map approximates a leaky rectifier with negative-half slope
``alpha``; ``n`` controls sharpness (the approximation approaches the kinked
map as n grows). Three algebraic variants are shipped:

* ``sau`` - Gaussian term with coefficient 1/(2n); the activation's
  standard closed form, and the form whose analytic gradients
  ``sau_grad_x`` / ``sau_grad_alpha`` implement.
* ``sau_exact`` - the exact Gaussian-convolution of the leaky rectifier;
  its Gaussian term carries an extra (1-alpha) factor. The two differ by
  exactly (alpha/2)(1/n)sqrt(2/pi)e^{-n^2x^2/2}, which the test suite pins
  down rather than silently reconciling.
* ``sau_zero_centered`` - the first variant with its Gaussian term
  multiplied by x, so the output at 0 is exactly 0.

Scalar operations live here as the readable reference; bulk evaluation goes
through the selected kernel backend (``sau._backend``).
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _backend
from .scalar_math import (
    INV_SQRT2,
    INV_SQRT_2PI,
    erf,
    exp_neg_half_sq,
    gaussian_pdf,
)

__all__ = [
    "SauParams", "ActivationEval", "ActivationKind",
    "sau_forward", "sau_exact_forward", "sau_zero_centered_forward",
    "sau_grad_x", "sau_grad_alpha",
    "activation_eval", "eval_activation_arrays",
    "leaky_relu", "kind_from_name", "ACTIVATION_TAGS",
]

SQRT_2_OVER_PI = 0.7978845608028654

# |n*x| beyond which erf(n*x/sqrt(2)) is exactly +-1 at double precision,
# letting the erf call be skipped (the Gaussian term is still evaluated;
# it underflows to 0 on its own once |n*x| > ~38.6).
SAT_T = 10.0

_SAU_TAGS = ("sau", "sau_exact", "sau_zero_centered")
_FIXED_TAGS = ("relu", "elu", "softplus", "swish", "gelu", "relu6")
_SLOPE_TAGS = ("leaky_relu", "prelu")
ACTIVATION_TAGS = _SAU_TAGS + _SLOPE_TAGS + _FIXED_TAGS

_FORM_BY_TAG = {
    "sau": _backend.FORM_STANDARD,
    "sau_exact": _backend.FORM_EXACT,
    "sau_zero_centered": _backend.FORM_ZERO_CENTERED,
}

DEFAULT_ALPHA = 0.15
DEFAULT_N = 20000.0
PRELU_INIT_SLOPE = 0.25
LEAKY_SLOPE = 0.01


@dataclass(frozen=True)
class SauParams:
    """Smoothing parameters: negative-half slope alpha (trainable in the
    NN trainer) and fixed sharpness n > 0."""

    alpha: float = DEFAULT_ALPHA
    n: float = DEFAULT_N

    def __post_init__(self):
        if not (math.isfinite(self.n) and self.n > 0.0):
            raise ValueError(f"sharpness n must be finite and > 0, got {self.n!r}")
        if not math.isfinite(self.alpha):
            raise ValueError(f"alpha must be finite, got {self.alpha!r}")
        if self.alpha == 1.0:
            warnings.warn(
                "alpha = 1 makes the underlying map the identity, which is "
                "already smooth; smoothing is a no-op there", stacklevel=2)


@dataclass(frozen=True)
class ActivationEval:
    """Value and first derivatives of one activation at one point.

    d_dalpha is 0 for kinds without a trainable slope.
    """

    value: float
    d_dx: float
    d_dalpha: float = 0.0


@dataclass(frozen=True)
class ActivationKind:
    """An activation tag plus its parameters.

    SAU tags carry SauParams; leaky_relu / prelu carry a scalar slope
    (defaults 0.01 and 0.25); the remaining tags take no parameters.
    """

    tag: str
    params: "SauParams | float | None" = None

    def __post_init__(self):
        if self.tag not in ACTIVATION_TAGS:
            raise ValueError(
                f"unknown activation tag {self.tag!r}; "
                f"expected one of {ACTIVATION_TAGS}")
        if self.tag in _SAU_TAGS:
            if self.params is None:
                object.__setattr__(self, "params", SauParams())
            elif not isinstance(self.params, SauParams):
                raise ValueError(f"{self.tag} requires SauParams, "
                                 f"got {self.params!r}")
        elif self.tag in _SLOPE_TAGS:
            default = PRELU_INIT_SLOPE if self.tag == "prelu" else LEAKY_SLOPE
            if self.params is None:
                object.__setattr__(self, "params", default)
            elif not isinstance(self.params, (int, float)):
                raise ValueError(f"{self.tag} takes a scalar slope, "
                                 f"got {self.params!r}")
            else:
                object.__setattr__(self, "params", float(self.params))
        elif self.params is not None:
            raise ValueError(f"{self.tag} takes no parameters, "
                             f"got {self.params!r}")

    @property
    def trainable_alpha(self) -> bool:
        """True when the kind carries a slope updated by backprop."""
        return self.tag in _SAU_TAGS or self.tag == "prelu"

    @property
    def initial_alpha(self) -> float:
        if self.tag in _SAU_TAGS:
            return self.params.alpha
        if self.tag == "prelu":
            return self.params
        raise ValueError(f"{self.tag} has no trainable slope")


_NAME_ALIASES = {
    "sau_zero": "sau_zero_centered",
    "leaky": "leaky_relu",
}


def kind_from_name(name, alpha=None, n=None):
    """Build an ActivationKind from a CLI-style name.

    ``alpha`` overrides the slope for SAU forms, prelu, and leaky_relu;
    ``n`` overrides SAU sharpness. Unused overrides are rejected.
    """
    tag = _NAME_ALIASES.get(name, name)
    if tag not in ACTIVATION_TAGS:
        known = sorted(set(ACTIVATION_TAGS) | set(_NAME_ALIASES))
        raise ValueError(f"unknown activation {name!r}; expected one of {known}")
    if tag in _SAU_TAGS:
        return ActivationKind(tag, SauParams(
            alpha if alpha is not None else DEFAULT_ALPHA,
            n if n is not None else DEFAULT_N))
    if n is not None:
        raise ValueError(f"--n only applies to SAU forms, not {name!r}")
    if tag in _SLOPE_TAGS:
        return ActivationKind(tag, alpha)
    if alpha is not None:
        raise ValueError(f"--alpha does not apply to {name!r}")
    return ActivationKind(tag)


def override_support(name):
    """(takes_alpha, takes_n) for a CLI-style activation name.

    Lets callers that fan one flag set across several activations drop
    the overrides a given kind would reject.
    """
    tag = _NAME_ALIASES.get(name, name)
    if tag not in ACTIVATION_TAGS:
        known = sorted(set(ACTIVATION_TAGS) | set(_NAME_ALIASES))
        raise ValueError(f"unknown activation {name!r}; expected one of {known}")
    return (tag in _SAU_TAGS or tag in _SLOPE_TAGS, tag in _SAU_TAGS)


def leaky_relu(alpha):
    """The underlying kinked map: x for x >= 0, alpha*x below."""
    def f(x):
        return x if x >= 0.0 else alpha * x
    return f


def _pieces(x, p):
    # shared transcendental pieces; mirrors the kernel fast path exactly:
    # past |n*x| = 10 erf has saturated and the Gaussian factor is below
    # half an ulp of every other term, so both are pinned outright
    t = p.n * x
    if abs(t) > SAT_T:
        e = 1.0 if t > 0.0 else -1.0
        g = 0.0
    else:
        e = erf(t * INV_SQRT2)
        g = exp_neg_half_sq(t)
    return t, e, g


def sau_forward(x, p):
    """Standard closed form: (1/(2n))sqrt(2/pi)e^{-n^2x^2/2}
    + ((1+a)/2)x + ((1-a)/2)x*erf(nx/sqrt(2))."""
    _, e, g = _pieces(x, p)
    c = SQRT_2_OVER_PI
    return (c / (2.0 * p.n)) * g + 0.5 * (1.0 + p.alpha) * x \
        + 0.5 * (1.0 - p.alpha) * (x * e)


def sau_exact_forward(x, p):
    """Exact Gaussian convolution of the kinked map: the Gaussian term
    carries the extra (1-alpha) factor the standard form drops."""
    _, e, g = _pieces(x, p)
    c = SQRT_2_OVER_PI
    return 0.5 * (1.0 + p.alpha) * x \
        + 0.5 * (1.0 - p.alpha) * (x * e + (c / p.n) * g)


def sau_zero_centered_forward(x, p):
    """Standard form with the Gaussian term multiplied by x, so the
    output at 0 is exactly 0."""
    _, e, g = _pieces(x, p)
    c = SQRT_2_OVER_PI
    return (c / (2.0 * p.n)) * (x * g) + 0.5 * (1.0 + p.alpha) * x \
        + 0.5 * (1.0 - p.alpha) * (x * e)


def sau_grad_x(x, p):
    """Analytic x-derivative of sau_forward."""
    _, e, g = _pieces(x, p)
    c = SQRT_2_OVER_PI
    half_1m = 0.5 * (1.0 - p.alpha)
    xg = x * g
    return (-0.5 * p.n * c) * xg + 0.5 * (1.0 + p.alpha) + half_1m * e \
        + (p.n * half_1m * c) * xg


def sau_grad_alpha(x, p):
    """Analytic alpha-derivative of sau_forward: (x/2)(1 - erf(nx/sqrt(2)))."""
    _, e, _ = _pieces(x, p)
    return 0.5 * x * (1.0 - e)


def _sau_grad_x_exact(x, p):
    _, e, _ = _pieces(x, p)
    return 0.5 * (1.0 + p.alpha) + 0.5 * (1.0 - p.alpha) * e


def _sau_grad_alpha_exact(x, p):
    _, e, g = _pieces(x, p)
    return 0.5 * x * (1.0 - e) - (SQRT_2_OVER_PI / (2.0 * p.n)) * g


def _sau_grad_x_zero(x, p):
    _, e, g = _pieces(x, p)
    c = SQRT_2_OVER_PI
    half_1m = 0.5 * (1.0 - p.alpha)
    xg = x * g
    return (c / (2.0 * p.n)) * g - (0.5 * c * p.n) * (x * xg) \
        + 0.5 * (1.0 + p.alpha) + half_1m * e + (p.n * half_1m * c) * xg


_SAU_SCALAR = {
    "sau": (sau_forward, sau_grad_x, sau_grad_alpha),
    "sau_exact": (sau_exact_forward, _sau_grad_x_exact, _sau_grad_alpha_exact),
    "sau_zero_centered": (sau_zero_centered_forward, _sau_grad_x_zero,
                          sau_grad_alpha),
}


def _sigmoid(x):
    if x >= 0.0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def activation_eval(kind, x):
    """Evaluate one activation at one point: value, d_dx, d_dalpha.

    At kinks of the piecewise baselines (0 for relu / leaky_relu / prelu;
    0 and 6 for relu6) the right-hand derivative is returned.
    """
    tag = kind.tag
    if tag in _SAU_TAGS:
        value_f, dx_f, da_f = _SAU_SCALAR[tag]
        p = kind.params
        return ActivationEval(value_f(x, p), dx_f(x, p), da_f(x, p))
    if tag == "relu":
        return ActivationEval(x if x > 0.0 else 0.0,
                              1.0 if x >= 0.0 else 0.0)
    if tag == "leaky_relu":
        a = kind.params
        if x >= 0.0:
            return ActivationEval(x, 1.0)
        return ActivationEval(a * x, a)
    if tag == "prelu":
        a = kind.params
        if x >= 0.0:
            return ActivationEval(x, 1.0, 0.0)
        return ActivationEval(a * x, a, x)
    if tag == "elu":
        if x >= 0.0:
            return ActivationEval(x, 1.0)
        return ActivationEval(math.expm1(x), math.exp(x))
    if tag == "softplus":
        v = max(x, 0.0) + math.log1p(math.exp(-abs(x)))
        return ActivationEval(v, _sigmoid(x))
    if tag == "swish":
        s = _sigmoid(x)
        return ActivationEval(x * s, s * (1.0 + x * (1.0 - s)))
    if tag == "gelu":
        phi_cdf = 0.5 * (1.0 + erf(x * INV_SQRT2))
        return ActivationEval(x * phi_cdf, phi_cdf + x * gaussian_pdf(x))
    if tag == "relu6":
        if x < 0.0:
            return ActivationEval(0.0, 0.0)
        if x < 6.0:
            return ActivationEval(x, 1.0)
        return ActivationEval(6.0, 0.0)
    raise ValueError(f"unknown activation tag {tag!r}")


def _stable_sigmoid_arrays(z):
    e = np.exp(-np.abs(z))
    return np.where(z >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))


def eval_activation_arrays(kind, z, alpha=None, grads=True):
    """Array-valued activation evaluation for the trainer.

    Returns (value, d_dx, d_dalpha); the gradient slots are None when
    grads=False, and d_dalpha is None for kinds without a trainable slope.
    ``alpha`` supplies the current trainable slope for SAU forms and prelu
    (defaulting to the kind's initial value); fixed kinds ignore it.
    """
    tag = kind.tag
    z = np.asarray(z, dtype=np.float64)
    if tag in _SAU_TAGS:
        a = kind.params.alpha if alpha is None else alpha
        return _backend.sau_arrays(z, a, kind.params.n, _FORM_BY_TAG[tag],
                                   grads=grads)
    if tag == "prelu":
        a = kind.params if alpha is None else alpha
        value = np.where(z >= 0.0, z, a * z)
        if not grads:
            return value, None, None
        return (value, np.where(z >= 0.0, 1.0, a),
                np.where(z < 0.0, z, 0.0))
    if tag == "leaky_relu":
        a = kind.params
        value = np.where(z >= 0.0, z, a * z)
        if not grads:
            return value, None, None
        return value, np.where(z >= 0.0, 1.0, a), None
    if tag == "relu":
        value = np.maximum(z, 0.0)
        if not grads:
            return value, None, None
        return value, (z >= 0.0).astype(np.float64), None
    if tag == "elu":
        zn = np.minimum(z, 0.0)  # clamp before exp so z>0 cannot overflow
        value = np.where(z >= 0.0, z, np.expm1(zn))
        if not grads:
            return value, None, None
        return value, np.where(z >= 0.0, 1.0, np.exp(zn)), None
    if tag == "softplus":
        value = np.logaddexp(0.0, z)
        if not grads:
            return value, None, None
        return value, _stable_sigmoid_arrays(z), None
    if tag == "swish":
        s = _stable_sigmoid_arrays(z)
        value = z * s
        if not grads:
            return value, None, None
        return value, s * (1.0 + z * (1.0 - s)), None
    if tag == "gelu":
        phi_cdf = 0.5 * (1.0 + _backend.erf_array(z * INV_SQRT2))
        value = z * phi_cdf
        if not grads:
            return value, None, None
        # |z| clamp keeps z*z from overflowing; the density is exactly 0
        # well before the clamp bites
        zc = np.minimum(np.abs(z), 40.0)
        return value, phi_cdf + z * (INV_SQRT_2PI * np.exp(-0.5 * zc * zc)), None
    if tag == "relu6":
        value = np.clip(z, 0.0, 6.0)
        if not grads:
            return value, None, None
        return value, ((z >= 0.0) & (z < 6.0)).astype(np.float64), None
    raise ValueError(f"unknown activation tag {tag!r}")

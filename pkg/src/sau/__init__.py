"""Smoothed leaky-rectifier activations, built as a mollifier convolution
with a closed form, plus a quadrature cross-check, a small dense-network
trainer, and IDX dataset IO.

The hot kernels have a compiled backend with a pure-python twin; see
`backend_name()` for which one this process is using and the
SAU_BACKEND environment variable to force a choice.
"""

from ._backend import available_backends, backend_name
from .activations import (
    ActivationEval,
    ActivationKind,
    SauParams,
    activation_eval,
    eval_activation_arrays,
    kind_from_name,
    leaky_relu,
    sau_exact_forward,
    sau_forward,
    sau_grad_alpha,
    sau_grad_x,
    sau_zero_centered_forward,
)
from .datasets import (
    BadMagic,
    DatasetSplit,
    DimMismatch,
    TruncatedFile,
    load_idx,
    locate_mnist,
    make_sine_regression,
    make_xor,
    save_idx,
)
from .mollifier import (
    BudgetExceeded,
    Mollifier,
    MollifierInvalid,
    MollifierReport,
    QuadratureSpec,
    broken_double_mass_mollifier,
    bump_mollifier,
    check_mollifier,
    convolve_at,
    gaussian_mollifier,
    scale_mollifier,
    smoothed_function,
)
from .nn import (
    Gradients,
    Network,
    NetworkSpec,
    NonFiniteLoss,
    ShapeMismatch,
    TrainConfig,
    TrainReport,
    cosine_lr,
    evaluate,
    forward_backward,
    init_network,
    train,
)
from .scalar_math import erf, erf_derivative, exp_neg_half_sq, gaussian_pdf

__version__ = "0.1.0"

__all__ = [
    "ActivationEval",
    "ActivationKind",
    "BadMagic",
    "BudgetExceeded",
    "DatasetSplit",
    "DimMismatch",
    "Gradients",
    "Mollifier",
    "MollifierInvalid",
    "MollifierReport",
    "Network",
    "NetworkSpec",
    "NonFiniteLoss",
    "QuadratureSpec",
    "SauParams",
    "ShapeMismatch",
    "TrainConfig",
    "TrainReport",
    "TruncatedFile",
    "__version__",
    "activation_eval",
    "available_backends",
    "backend_name",
    "broken_double_mass_mollifier",
    "bump_mollifier",
    "check_mollifier",
    "convolve_at",
    "cosine_lr",
    "erf",
    "erf_derivative",
    "eval_activation_arrays",
    "evaluate",
    "exp_neg_half_sq",
    "forward_backward",
    "gaussian_mollifier",
    "gaussian_pdf",
    "init_network",
    "kind_from_name",
    "leaky_relu",
    "load_idx",
    "locate_mnist",
    "make_sine_regression",
    "make_xor",
    "sau_exact_forward",
    "sau_forward",
    "sau_grad_alpha",
    "sau_grad_x",
    "sau_zero_centered_forward",
    "save_idx",
    "scale_mollifier",
    "smoothed_function",
    "train",
]

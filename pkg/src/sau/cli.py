"""Command-line surface: curve export, verification suites, training, and
activation comparison.

Conventions shared by every command: exit 0 on success, 1 on a failed
verification/comparison, 2 on environment/flag/IO errors; all floats are
written with repr so reruns with the same seed produce byte-identical
CSVs; an optional config file supplies `key = value` defaults that
explicit flags override.
"""

import argparse
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import backend_name
from .activations import (
    SQRT_2_OVER_PI,
    SauParams,
    activation_eval,
    kind_from_name,
    leaky_relu,
    override_support,
    sau_exact_forward,
    sau_forward,
)
from .datasets import (
    DATA_DIR_ENV,
    load_idx,
    locate_mnist,
    make_sine_regression,
    make_xor,
)
from .mollifier import (
    MollifierInvalid,
    QuadratureSpec,
    broken_double_mass_mollifier,
    bump_mollifier,
    check_mollifier,
    gaussian_mollifier,
    smoothed_function,
)
from .nn import NetworkSpec, NonFiniteLoss, TrainConfig, init_network, train

SUITES = ("oracle", "grad", "convergence", "mollifier")
DATASETS = ("mnist", "xor", "sine")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ENV = 2


class _CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _float_list(text):
    return [float(part) for part in text.split(",") if part.strip()]


def _int_list(text):
    return [int(part) for part in text.split(",") if part.strip()]


_TRUE_WORDS = {"1", "true", "yes", "on"}
_FALSE_WORDS = {"0", "false", "no", "off"}


def _bool_word(text):
    low = text.strip().lower()
    if low in _TRUE_WORDS:
        return True
    if low in _FALSE_WORDS:
        return False
    raise ValueError(f"expected a boolean word, got {text!r}")


# name -> (converter, default); converters also parse config-file strings
_COMMON_TRAIN_OPTS = {
    "dataset": (str, None),
    "arch": (_int_list, [8]),
    "alpha": (float, None),
    "n": (float, None),
    "epochs": (int, 10),
    "batch": (int, 0),           # 0 = full batch
    "optimizer": (str, "adam"),
    "lr": (float, 1e-3),
    "momentum": (float, 0.9),
    "weight_decay": (float, 0.0),
    "schedule": (str, "constant"),
    "seed": (int, 0),
    "sine_count": (int, 256),
    "data_dir": (str, None),
    "out": (str, None),
}

_OPTION_SPECS = {
    "eval": {
        "activation": (str, None),
        "alpha": (float, None),
        "n": (float, None),
        "xmin": (float, -3.0),
        "xmax": (float, 3.0),
        "step": (float, 0.01),
        "out": (str, None),
    },
    "verify": {
        "tol": (float, None),
        "h": (float, 1e-5),
        "step": (float, None),
        "with_broken_fixture": (_bool_word, False),
    },
    "train": dict(_COMMON_TRAIN_OPTS, activation=(str, "sau")),
    "compare": dict(_COMMON_TRAIN_OPTS, activations=(str, None),
                    repeats=(int, 1)),
}

_REQUIRED = {
    "eval": ("activation",),
    "verify": (),
    "train": ("dataset",),
    "compare": ("dataset", "activations"),
}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="sau",
        description="Smoothed leaky-rectifier activation toolkit")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__} ({backend_name()} kernels)")
    sub = parser.add_subparsers(dest="command", required=True)

    helps = {
        "eval": "write a value/derivative curve as CSV",
        "verify": "run a verification suite",
        "train": "train a dense network and write metrics CSV",
        "compare": "train once per activation and summarize",
    }
    flag_help = {
        "activation": "activation name (sau, sau_exact, sau_zero, relu, "
                      "leaky_relu, elu, softplus, swish, gelu, prelu, relu6)",
        "activations": "comma-separated activation names (at least two)",
        "alpha": "negative-half slope for sau forms / prelu / leaky_relu",
        "n": "sharpness of the sau forms",
        "xmin": "grid start", "xmax": "grid end", "step": "grid step",
        "out": "output CSV path (default: stdout)",
        "tol": "override the suite tolerance",
        "h": "finite-difference step for the grad suite",
        "with_broken_fixture": "include a deliberately invalid density "
                               "(mass 2) in the mollifier suite",
        "dataset": f"one of {DATASETS}",
        "arch": "comma-separated hidden layer sizes",
        "epochs": "training epochs",
        "batch": "batch size (0 = full batch)",
        "optimizer": "adam or sgd",
        "lr": "learning rate",
        "momentum": "sgd momentum",
        "weight_decay": "sgd L2 weight decay (weights only)",
        "schedule": "constant or cosine",
        "seed": "run seed (also seeds synthetic datasets)",
        "sine_count": "sample count for the sine dataset",
        "data_dir": f"directory with the IDX files (default: ${DATA_DIR_ENV})",
        "repeats": "seeds per activation; rows then hold means, with std "
                   "columns appended",
    }

    for command, spec in _OPTION_SPECS.items():
        p = sub.add_parser(command, help=helps[command])
        if command == "verify":
            p.add_argument("suite", choices=SUITES)
        for name, (conv, _default) in spec.items():
            flag = "--" + name.replace("_", "-")
            if conv is _bool_word:
                p.add_argument(flag, dest=name, action="store_true",
                               default=argparse.SUPPRESS,
                               help=flag_help.get(name))
            else:
                p.add_argument(flag, dest=name, type=conv,
                               default=argparse.SUPPRESS,
                               help=flag_help.get(name))
        p.add_argument("--config", default=None,
                       help="flat `key = value` file; flags override it")
    return parser


def _parse_config_file(path, spec, command):
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise _CliError(EXIT_ENV, f"cannot read config file: {exc}")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise _CliError(EXIT_ENV,
                            f"{path}:{lineno}: expected `key = value`, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in spec:
            raise _CliError(EXIT_ENV,
                            f"{path}:{lineno}: unknown key {key!r} for "
                            f"command {command!r}")
        conv = spec[key][0]
        try:
            values[key] = conv(value.strip())
        except ValueError as exc:
            raise _CliError(EXIT_ENV, f"{path}:{lineno}: bad value for "
                                      f"{key!r}: {exc}")
    return values


def _resolve_options(args):
    """Merge defaults, config-file values, and explicit flags (in that
    order of increasing precedence)."""
    ns = vars(args)
    command = ns.pop("command")
    config_path = ns.pop("config", None)
    spec = _OPTION_SPECS[command]
    opts = {name: default for name, (_conv, default) in spec.items()}
    if config_path:
        opts.update(_parse_config_file(config_path, spec, command))
    suite = ns.pop("suite", None)
    opts.update(ns)
    for name in _REQUIRED[command]:
        if opts.get(name) is None:
            raise _CliError(EXIT_ENV, f"--{name.replace('_', '-')} is required")
    if suite is not None:
        opts["suite"] = suite
    return command, opts


def _write_text(out, text):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise _CliError(EXIT_ENV, f"cannot write {out}: {exc}")


def _grid(xmin, xmax, step):
    if not (xmax > xmin and step > 0.0):
        raise _CliError(EXIT_ENV,
                        f"need xmin < xmax and step > 0, got "
                        f"[{xmin}, {xmax}] step {step}")
    count = int(math.floor((xmax - xmin) / step + 1e-9)) + 1
    return [xmin + k * step for k in range(count)]


def cmd_eval(opts):
    try:
        kind = kind_from_name(opts["activation"], opts["alpha"], opts["n"])
    except ValueError as exc:
        raise _CliError(EXIT_ENV, str(exc))
    lines = ["x,value,d_dx,d_dalpha"]
    for x in _grid(opts["xmin"], opts["xmax"], opts["step"]):
        ev = activation_eval(kind, x)
        lines.append(f"{x!r},{ev.value!r},{ev.d_dx!r},{ev.d_dalpha!r}")
    _write_text(opts["out"], "\n".join(lines) + "\n")
    return EXIT_OK


def _suite_oracle(opts):
    tol = opts["tol"] if opts["tol"] is not None else 1e-8
    step = opts["step"] if opts["step"] is not None else 0.05
    quad = QuadratureSpec(abs_tolerance=1e-10)
    gaussian = gaussian_mollifier()
    xs = _grid(-5.0, 5.0, step)
    worst = 0.0
    checked = 0
    failures = []
    for alpha in (0.0, 0.15, 0.5):
        for n in (1.0, 5.0, 20.0):
            smoothed = smoothed_function(leaky_relu(alpha), gaussian, n, quad)
            params = SauParams(alpha, n)
            for x in xs:
                err = abs(smoothed(x) - sau_exact_forward(x, params))
                worst = max(worst, err)
                checked += 1
                if err > tol:
                    failures.append((x, alpha, n, err))
    print(f"oracle: {checked} points, max |quadrature - closed form| "
          f"= {worst:.3e} (tol {tol:g})")
    return failures


GRAD_CHECK_FLOOR = 1e-4


def _suite_grad(opts):
    from ._backend import sau_arrays, FORM_STANDARD, FORM_EXACT, FORM_ZERO_CENTERED

    tol = opts["tol"] if opts["tol"] is not None else 1e-6
    step = opts["step"] if opts["step"] is not None else 0.01
    h = opts["h"]
    # Central differences carry rounding noise of about |f|*eps/(2h),
    # 5e-12 here; below this magnitude the comparison measures that
    # noise rather than gradient correctness, so those points are skipped.
    floor = GRAD_CHECK_FLOOR
    xs = np.array(_grid(-3.0, 3.0, step))
    failures = []
    worst = 0.0
    forms = (("sau", FORM_STANDARD), ("sau_exact", FORM_EXACT),
             ("sau_zero_centered", FORM_ZERO_CENTERED))
    for name, form in forms:
        for alpha in (0.15, 0.5):
            for n in (1.0, 5.0, 20.0):
                _, d_dx, d_da = sau_arrays(xs, alpha, n, form)
                up, _, _ = sau_arrays(xs + h, alpha, n, form, grads=False)
                down, _, _ = sau_arrays(xs - h, alpha, n, form, grads=False)
                fd_x = (up - down) / (2.0 * h)
                up, _, _ = sau_arrays(xs, alpha + h, n, form, grads=False)
                down, _, _ = sau_arrays(xs, alpha - h, n, form, grads=False)
                fd_a = (up - down) / (2.0 * h)
                for fd, an, label in ((fd_x, d_dx, "d_dx"),
                                      (fd_a, d_da, "d_dalpha")):
                    keep = np.abs(an) >= floor
                    rel = np.abs(fd[keep] - an[keep]) / np.abs(an[keep])
                    if rel.size == 0:
                        continue
                    worst = max(worst, float(rel.max()))
                    for idx in np.nonzero(rel > tol)[0]:
                        x = float(xs[keep][idx])
                        failures.append((x, alpha, n,
                                         f"{name} {label} rel {rel[idx]:.3e}"))
    print(f"grad: finite differences (h={h:g}) vs analytic on 3 forms, "
          f"max rel err = {worst:.3e} (tol {tol:g})")
    return failures


def _suite_convergence(opts):
    from ._backend import sau_arrays, FORM_STANDARD

    tol = opts["tol"] if opts["tol"] is not None else 0.01
    step = opts["step"] if opts["step"] is not None else 0.05
    xs = np.array(_grid(-5.0, 5.0, step))
    alpha = 0.15
    kinked = np.where(xs >= 0.0, xs, alpha * xs)
    failures = []
    sups = []
    for n in [float(2 ** k) for k in range(15)]:
        value, _, _ = sau_arrays(xs, alpha, n, FORM_STANDARD, grads=False)
        sups.append(float(np.max(np.abs(value - kinked))))
    for i in range(1, len(sups)):
        ratio = sups[i] / sups[i - 1]
        if abs(ratio - 0.5) > tol * 0.5:
            failures.append((math.nan, alpha, float(2 ** i),
                             f"sup ratio {ratio!r} not halving"))
        if sups[i] > sups[i - 1]:
            failures.append((math.nan, alpha, float(2 ** i),
                             "sup-norm deviation increased"))
    at_zero = sau_forward(0.0, SauParams(0.15, 20000.0))
    expected = SQRT_2_OVER_PI / 40000.0
    if abs(at_zero - expected) > 1e-12:
        failures.append((0.0, 0.15, 20000.0,
                         f"value {at_zero!r} != {expected!r}"))
    print(f"convergence: sup deviation {sups[0]!r} -> {sups[-1]!r} over "
          f"n = 1..{2 ** 14}, halving tol {tol:g}")
    return failures


def _suite_mollifier(opts):
    mollifiers = [gaussian_mollifier(), bump_mollifier()]
    if opts["with_broken_fixture"]:
        mollifiers.append(broken_double_mass_mollifier())
    failures = []
    for m in mollifiers:
        try:
            report = check_mollifier(m)
        except MollifierInvalid as exc:
            print(f"mollifier {m.name}: INVALID ({exc})")
            failures.append((math.nan, math.nan, math.nan, str(exc)))
            continue
        print(f"mollifier {m.name}: mass={report.mass!r} "
              f"min_density={report.min_density!r} "
              f"support_leak={report.support_leak!r}")
    return failures


def cmd_verify(opts):
    suite = {"oracle": _suite_oracle, "grad": _suite_grad,
             "convergence": _suite_convergence,
             "mollifier": _suite_mollifier}[opts["suite"]]
    failures = suite(opts)
    if failures:
        print(f"{len(failures)} check(s) failed:")
        for x, alpha, n, detail in failures[:20]:
            print(f"  FAIL x={x!r} alpha={alpha!r} n={n!r}: {detail}")
        if len(failures) > 20:
            print(f"  ... and {len(failures) - 20} more")
        return EXIT_CHECK_FAILED
    print("all checks passed")
    return EXIT_OK


def _load_dataset(opts):
    """Returns (train_split, test_split, input_size, output_size, head)."""
    name = opts["dataset"]
    if name == "xor":
        split = make_xor()
        return split, split, 2, 2, "softmax"
    if name == "sine":
        count, seed = opts["sine_count"], opts["seed"]
        return (make_sine_regression(count, seed),
                make_sine_regression(count, seed + 1), 1, 1, "mse")
    if name == "mnist":
        paths, missing = locate_mnist(opts["data_dir"])
        if missing:
            raise _CliError(EXIT_ENV,
                            "missing IDX files (set --data-dir or "
                            f"${DATA_DIR_ENV}):\n  " + "\n  ".join(missing))
        train_split = load_idx(paths["train_images"], paths["train_labels"])
        test_split = load_idx(paths["test_images"], paths["test_labels"])
        classes = int(max(train_split.labels.max(),
                          test_split.labels.max())) + 1
        return (train_split, test_split, train_split.inputs.shape[1],
                classes, "softmax")
    raise _CliError(EXIT_ENV, f"unknown dataset {name!r}; expected {DATASETS}")


_OPTIMIZER_NAMES = {"adam": "adam", "sgd": "sgd_momentum",
                    "sgd_momentum": "sgd_momentum"}
_SCHEDULE_NAMES = {"constant": "constant", "cosine": "cosine_annealing",
                   "cosine_annealing": "cosine_annealing"}


def _run_training(opts, activation_name, seed):
    """One complete training run; returns (report, wall_seconds)."""
    started = time.perf_counter()
    try:
        kind = kind_from_name(activation_name, opts["alpha"], opts["n"])
    except ValueError as exc:
        raise _CliError(EXIT_ENV, str(exc))
    run_opts = dict(opts, seed=seed)
    train_split, test_split, in_size, out_size, head = _load_dataset(run_opts)
    sizes = (in_size, *run_opts["arch"], out_size)
    spec = NetworkSpec(sizes, kind, head=head, seed=seed)
    optimizer = _OPTIMIZER_NAMES.get(run_opts["optimizer"])
    schedule = _SCHEDULE_NAMES.get(run_opts["schedule"])
    if optimizer is None:
        raise _CliError(EXIT_ENV, f"unknown optimizer {run_opts['optimizer']!r}")
    if schedule is None:
        raise _CliError(EXIT_ENV, f"unknown schedule {run_opts['schedule']!r}")
    batch = run_opts["batch"] or train_split.inputs.shape[0]
    try:
        cfg = TrainConfig(
            learning_rate=run_opts["lr"], epochs=run_opts["epochs"],
            batch_size=batch, seed=seed, optimizer=optimizer,
            momentum=run_opts["momentum"],
            weight_decay=run_opts["weight_decay"], lr_schedule=schedule)
    except ValueError as exc:
        raise _CliError(EXIT_ENV, str(exc))
    net = init_network(spec)
    report = train(net, train_split, cfg, test=test_split)
    return report, time.perf_counter() - started


def cmd_train(opts):
    try:
        report, _ = _run_training(opts, opts["activation"], opts["seed"])
    except NonFiniteLoss as exc:
        print(f"training aborted: {exc} (epoch {exc.epoch}, step {exc.step})",
              file=sys.stderr)
        return EXIT_CHECK_FAILED
    _write_text(opts["out"], report.to_csv())
    if report.records:
        final = report.final
        if math.isnan(final.test_acc):
            print(f"final test loss: {final.test_loss!r}", file=sys.stderr)
        else:
            print(f"final test accuracy: {final.test_acc!r}", file=sys.stderr)
    else:
        print("no epochs run", file=sys.stderr)
    return EXIT_OK


def cmd_compare(opts):
    names = [s.strip() for s in opts["activations"].split(",") if s.strip()]
    if len(names) < 2:
        raise _CliError(EXIT_ENV, "need at least two activations to compare")
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise _CliError(EXIT_ENV, f"duplicate activation names: {dupes}")
    repeats = opts["repeats"]
    if repeats < 1:
        raise _CliError(EXIT_ENV, f"--repeats must be >= 1, got {repeats}")

    header = "activation,final_test_acc,final_test_loss,wall_seconds,final_alpha"
    if repeats > 1:
        header += ",test_acc_std,test_loss_std"
    lines = [header]
    any_failed = False
    for name in names:
        accs, losses, alpha_rows = [], [], []
        wall_total = 0.0
        try:
            # shared --alpha/--n flags apply only to kinds that take them
            takes_alpha, takes_n = override_support(name)
            run_opts = dict(opts,
                            alpha=opts["alpha"] if takes_alpha else None,
                            n=opts["n"] if takes_n else None)
            for r in range(repeats):
                report, wall = _run_training(run_opts, name, opts["seed"] + r)
                wall_total += wall
                if not report.records:
                    raise _CliError(EXIT_ENV, "no epochs run")
                accs.append(report.final.test_acc)
                losses.append(report.final.test_loss)
                alpha_rows.append(report.final.alphas)
        except (_CliError, NonFiniteLoss, ValueError) as exc:
            print(f"compare: {name} failed: {exc}", file=sys.stderr)
            any_failed = True
            continue
        if alpha_rows and alpha_rows[0]:
            layer_means = [float(np.mean([row[i] for row in alpha_rows]))
                           for i in range(len(alpha_rows[0]))]
            alpha_field = ";".join(repr(a) for a in layer_means)
        else:
            alpha_field = ""
        row = (f"{name},{float(np.mean(accs))!r},{float(np.mean(losses))!r},"
               f"{wall_total!r},{alpha_field}")
        if repeats > 1:
            row += f",{float(np.std(accs))!r},{float(np.std(losses))!r}"
        lines.append(row)
    _write_text(opts["out"], "\n".join(lines) + "\n")
    return EXIT_CHECK_FAILED if any_failed else EXIT_OK


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        command, opts = _resolve_options(args)
        handler = {"eval": cmd_eval, "verify": cmd_verify,
                   "train": cmd_train, "compare": cmd_compare}[command]
        return handler(opts)
    except _CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands: ``persistence`` (diagram of a CSV signal), ``estimate-n``
(period-count estimators), ``odometry`` (sequences and quality metrics),
``bench`` (synthetic success-rate benchmark), ``bound`` (probability bounds),
``simulate`` (synthetic noisy drives).  Exit codes: 0 success, 2 input error,
3 model inconsistency, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .diagram import to_measure
from .estimators import (
    EstimatorReport,
    crossings_per_period,
    n_exact,
    n_hat_auto,
    n_hat_ball,
    n_hat_cluster,
    zero_crossings_estimate,
)
from .noise import BoundInputs, SquaredExponentialSampler, bound_gaussian_process, bound_white_noise
from .odometry import (
    DEFAULT_CIRCUMFERENCE,
    DivisibilityError,
    odometric_sequences,
    odometry_metrics,
)
from .persistence import diagram_circle, diagram_interval
from .signal import (
    BUILTIN_TEMPLATES,
    CsvFormatError,
    Signal,
    detrend_median,
    get_template,
    random_reparam,
    read_signal_csv,
    smooth_random_warp,
    write_signal_csv,
)

EX_OK = 0
EX_INPUT = 2
EX_MODEL = 3
EX_USAGE = 64

DEFAULT_DETREND_WINDOW = 5.0  # seconds


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 64, not argparse's 2
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _subseed(*key) -> int:
    """Counter-based seed split: deterministic and order-independent."""
    return int(np.random.SeedSequence(list(key)).generate_state(1)[0])


def _env_seed(default: int) -> int:
    return int(os.environ.get("PERIODICA_SEED", default))


def _build_parser() -> _Parser:
    p = _Parser(prog="periodica", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("persistence", help="persistence diagram of a CSV signal")
    d.add_argument("input_csv")
    d.add_argument("output_json")
    d.add_argument("--circle", action="store_true", help="treat the signal as one period on the circle")

    e = sub.add_parser("estimate-n", help="estimate the number of periods")
    e.add_argument("input_csv")
    e.add_argument("--method", default="auto",
                   help="auto | ball:TAU | cluster:TAU | exact | zc:K")
    e.add_argument("--detrend", action="store_true", help="median-detrend first")
    e.add_argument("--detrend-window", type=float, default=DEFAULT_DETREND_WINDOW)

    o = sub.add_parser("odometry", help="odometric sequences and metrics")
    o.add_argument("input_csv")
    o.add_argument("--n", default="auto", help="period count or 'auto'")
    o.add_argument("--tau", default="auto", help="scale or 'auto'")
    o.add_argument("--circumference", type=float, default=DEFAULT_CIRCUMFERENCE)
    o.add_argument("--reference", default=None, help="displacement CSV (t, meters)")
    o.add_argument("--detrend-window", type=float, default=DEFAULT_DETREND_WINDOW)
    o.add_argument("--no-detrend", action="store_true")
    o.add_argument("--output", default=None, help="write the JSON report here instead of stdout")

    b = sub.add_parser("bench", help="synthetic success-rate benchmark")
    b.add_argument("config_json")
    b.add_argument("output_csv")

    bd = sub.add_parser("bound", help="correctness-probability bounds")
    bd.add_argument("kind", choices=["gp", "white"])
    bd.add_argument("--kappa", type=float, default=None)
    bd.add_argument("--tau", type=float, default=None)
    bd.add_argument("--sigma", type=float, default=None)
    bd.add_argument("--l", type=float, default=None)
    bd.add_argument("--omega", type=float, default=None)
    bd.add_argument("--c", type=float, default=0.0, help="smoothness constant of f o gamma")

    s = sub.add_parser("simulate", help="write a synthetic noisy drive")
    s.add_argument("template", choices=sorted(BUILTIN_TEMPLATES))
    s.add_argument("output_csv")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--sigma", type=float, default=0.0)
    s.add_argument("--l", type=float, default=0.2)
    s.add_argument("--omega", type=float, default=125.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--duration", type=float, default=1.0, help="recording length in seconds")
    s.add_argument(
        "--profile",
        choices=["smooth", "uniform-starts"],
        default="smooth",
        help="wheel-speed profile: smoothly varying speed, or the "
        "uniform-period-starts draw of the synthetic benchmark",
    )
    return p


def _cmd_persistence(args) -> int:
    s = read_signal_csv(args.input_csv)
    d = diagram_circle(s) if args.circle else diagram_interval(s)
    with open(args.output_json, "w", encoding="utf-8") as fh:
        fh.write(d.to_json())
        fh.write("\n")
    return EX_OK


def _parse_method(spec: str):
    name, _, param = spec.partition(":")
    if name in ("auto", "exact"):
        if param:
            raise _UsageError(f"method {name} takes no parameter")
        return name, None
    if name in ("ball", "cluster"):
        if not param:
            raise _UsageError(f"method {name} requires a tau, e.g. {name}:0.2")
        try:
            return name, float(param)
        except ValueError:
            raise _UsageError(f"invalid tau {param!r}") from None
    if name == "zc":
        if not param:
            raise _UsageError("method zc requires the crossings per period, e.g. zc:2")
        try:
            return name, int(param)
        except ValueError:
            raise _UsageError(f"invalid crossing count {param!r}") from None
    raise _UsageError(f"unknown method {spec!r}")


def _cmd_estimate_n(args) -> int:
    method, param = _parse_method(args.method)
    s = read_signal_csv(args.input_csv)
    if args.detrend:
        s = detrend_median(s, args.detrend_window)
    if method == "zc":
        report = EstimatorReport(zero_crossings_estimate(s, param), "zero_crossings")
    else:
        d = diagram_interval(s)
        if method == "auto":
            report = n_hat_auto(d)
        elif method == "exact":
            report = EstimatorReport(n_exact(to_measure(d, 0.0)), "exact")
        elif method == "ball":
            report = EstimatorReport(n_hat_ball(d, param), "ball", tau_used=param)
        else:
            report = EstimatorReport(n_hat_cluster(d, param), "cluster", tau_used=param)
    print(report.to_json())
    return EX_OK


def _cmd_odometry(args) -> int:
    s = read_signal_csv(args.input_csv)
    if not args.no_detrend:
        s = detrend_median(s, args.detrend_window)
    d = diagram_interval(s)
    n_spec, tau_spec = args.n, args.tau
    auto = None
    if n_spec == "auto" or tau_spec == "auto":
        auto = n_hat_auto(d)
    if n_spec == "auto":
        n = auto.n_hat
    else:
        n = int(n_spec)
    if tau_spec == "auto":
        if auto.tau_used is None:
            print("periodica: no scale with a nontrivial estimate", file=sys.stderr)
            return EX_MODEL
        tau = auto.tau_used
    else:
        tau = float(tau_spec)
    result = odometric_sequences(d, tau, n)
    doc = {"tau": result.tau, "K": result.k, "N": result.n, "sequences": result.sequences}
    if args.reference is not None:
        ref = read_signal_csv(args.reference)
        metrics = odometry_metrics(result.best_sequence, ref, args.circumference)
        doc["metrics"] = json.loads(metrics.to_json())
    text = json.dumps(doc)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.write("\n")
    else:
        print(text)
    return EX_OK


_BENCH_DEFAULTS = {
    "templates": sorted(BUILTIN_TEMPLATES),
    "n_range": [5, 50],
    "trials": 50,
    "sigma_grid": np.geomspace(1e-4, 6.0, 6).tolist(),
    "l_grid": np.geomspace(0.01, 0.4, 6).tolist(),
    "seed": 0,
    "estimators": ["auto_cluster", "zero_crossings_oracle"],
    "grid_points": 1024,
}


def run_bench(config: dict) -> list[tuple]:
    """Run the benchmark; returns (template, sigma, l, estimator, rate, trials) rows.

    Signals are sampled at a constant number of samples per turn (a uniform
    grid in phase, mapped back through gamma): the uniform-period-starts draw
    makes the shortest of n periods shrink like 1/n^2, which no fixed-rate
    time grid can resolve, and the benchmark measures noise robustness, not
    sampling failures.  The noise is still a GP in time, drawn on a uniform
    time grid (one factorization per cell) and interpolated to the sample
    times.
    """
    cfg = dict(_BENCH_DEFAULTS)
    cfg.update(config)
    seed = _env_seed(cfg["seed"])
    n_lo, n_hi = cfg["n_range"]
    trials = int(cfg["trials"])
    grid_points = int(cfg["grid_points"])
    noise_times = np.linspace(0.0, 1.0, grid_points + 1)
    rows = []
    for ti, template_id in enumerate(cfg["templates"]):
        f = get_template(template_id)
        k_zc = crossings_per_period(f)
        for si, sigma in enumerate(cfg["sigma_grid"]):
            for li, l in enumerate(cfg["l_grid"]):
                sampler = SquaredExponentialSampler(noise_times, float(sigma), float(l))
                hits = {name: 0 for name in cfg["estimators"]}
                for trial in range(trials):
                    rng = np.random.default_rng(
                        np.random.SeedSequence([seed, ti, si, li, trial])
                    )
                    n_true = int(rng.integers(n_lo, n_hi + 1))
                    gamma = random_reparam(n_true, int(rng.integers(0, 2**63)))
                    phases = np.linspace(0.0, float(n_true), grid_points + 1)
                    times = gamma.inverse(phases)
                    times[0], times[-1] = 0.0, 1.0
                    noise = np.interp(times, noise_times, sampler.draw_with(rng))
                    sig = Signal(times, f(phases) + noise)
                    for name in cfg["estimators"]:
                        if name == "auto_cluster":
                            got = n_hat_auto(diagram_interval(sig)).n_hat
                        elif name == "zero_crossings_oracle":
                            got = zero_crossings_estimate(sig, k_zc)
                        else:
                            raise _UsageError(f"unknown estimator {name!r}")
                        hits[name] += int(got == n_true)
                for name in cfg["estimators"]:
                    rows.append(
                        (template_id, float(sigma), float(l), name, hits[name] / trials, trials)
                    )
    rows.sort()
    return rows


def _cmd_bench(args) -> int:
    with open(args.config_json, "r", encoding="utf-8") as fh:
        config = json.load(fh)
    rows = run_bench(config)
    with open(args.output_csv, "w", encoding="utf-8", newline="") as fh:
        fh.write("template,sigma,l,estimator,success_rate,trials\n")
        for template_id, sigma, l, name, rate, trials in rows:
            fh.write(f"{template_id},{sigma!r},{l!r},{name},{rate!r},{trials}\n")
    return EX_OK


def _cmd_bound(args) -> int:
    if args.kind == "gp":
        if args.kappa is not None:
            inputs = BoundInputs(tau=2.0 * args.kappa, sigma=1.0, l=args.l)
        elif args.tau is not None and args.sigma is not None:
            inputs = BoundInputs(tau=args.tau, sigma=args.sigma, l=args.l)
        else:
            raise _UsageError("bound gp needs --kappa or both --tau and --sigma")
        if args.l is None:
            raise _UsageError("bound gp needs --l")
        literal = bound_gaussian_process(inputs)
        corrected = bound_gaussian_process(inputs, corrected=True)
    else:
        if args.tau is None or args.sigma is None or args.omega is None:
            raise _UsageError("bound white needs --tau, --sigma and --omega")
        inputs = BoundInputs(
            tau=args.tau, sigma=args.sigma, omega=args.omega, c_f_gamma=args.c
        )
        literal = bound_white_noise(inputs)
        corrected = bound_white_noise(inputs, corrected=True)
    print(
        json.dumps(
            {"literal": literal, "corrected": corrected, "inputs": json.loads(inputs.to_json())}
        )
    )
    return EX_OK


def _cmd_simulate(args) -> int:
    if args.n < 1:
        raise _UsageError("--n must be a positive integer")
    if args.duration <= 0:
        raise _UsageError("--duration must be positive")
    f = get_template(args.template)
    seed = _env_seed(args.seed)
    if args.profile == "smooth":
        gamma = smooth_random_warp(args.n, _subseed(seed, 0))
    else:
        gamma = random_reparam(args.n, _subseed(seed, 0))
    m = int(np.floor(args.omega * args.duration))
    times = np.arange(m + 1) / args.omega
    phases = gamma(times / args.duration)
    sampler = SquaredExponentialSampler(times, args.sigma, args.l)
    values = f(phases) + sampler.draw(_subseed(seed, 1))
    write_signal_csv(Signal(times, values), args.output_csv)
    meta = {
        "template": args.template,
        "n": args.n,
        "sigma": args.sigma,
        "l": args.l,
        "omega": args.omega,
        "seed": seed,
        "duration": args.duration,
        "gamma_knots_seconds": (gamma.knots * args.duration).tolist(),
        "gamma_images": gamma.images.tolist(),
    }
    with open(args.output_csv + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump(meta, fh)
        fh.write("\n")
    return EX_OK


_COMMANDS = {
    "persistence": _cmd_persistence,
    "estimate-n": _cmd_estimate_n,
    "odometry": _cmd_odometry,
    "bench": _cmd_bench,
    "bound": _cmd_bound,
    "simulate": _cmd_simulate,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as e:
        print(f"periodica: {e}", file=sys.stderr)
        return EX_USAGE
    except CsvFormatError as e:
        print(f"periodica: {args.input_csv if hasattr(args, 'input_csv') else ''}: {e}", file=sys.stderr)
        return EX_INPUT
    except DivisibilityError as e:
        print(f"periodica: {e}", file=sys.stderr)
        return EX_MODEL
    except (ValueError, OSError, json.JSONDecodeError) as e:
        print(f"periodica: {e}", file=sys.stderr)
        return EX_INPUT


if __name__ == "__main__":
    sys.exit(main())

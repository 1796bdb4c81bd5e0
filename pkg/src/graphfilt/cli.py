"""Command-line driver.

Exit codes: 0 success, 1 verification failure, 2 usage or invalid input,
3 I/O failure, 4 numerical failure (error class name on stderr).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InputError, NumericalError
from .filters import FilterSpec, allpass_arma, apply_exact, apply_spatial, lowpass_cayley, lowpass_polynomial
from .graph import DEFAULT_KERNEL_WIDTH, KINDS, MODES, SPARSITY_THRESHOLD, build_shift, gen_geometric_graph
from .io import load_filter, load_graph, load_signals, save_graph, write_signals, write_sweep_csv
from .linalg import eig_symmetric, spectral_norm
from .stability import CERT_RTOL, SweepConfig, certified_seminorm, loglog_slope, stability_sweep, sweep_band
from .verify import run_all, report_json

log = logging.getLogger("graphfilt")

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3, 4

# preset name -> (default shift kind, description)
PRESETS = {
    "lowpass-poly": ("normalized", "cubic least-squares fit to exp(-2 lam / lam_max) on [0, lam_max]"),
    "lowpass-cayley": ("unnormalized", "order-3 real-part Cayley fit to exp(-2 lam / lam_max) on [0, lam_max]"),
    "allpass-arma": ("unnormalized", "((1 - i lam/rho) / (1 + i lam/rho))^3 with rho = ||shift||"),
}


class UsageError(InputError):
    pass


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    return v


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _existing(path: str | None) -> None:
    if path is not None and not Path(path).is_file():
        raise FileNotFoundError(f"no such file: {path}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphfilt", description="Spectral graph filters and their stability.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("graph-gen", help="generate a Gaussian-kernel geometric graph")
    g.add_argument("--n", type=_positive_int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--kernel-width", type=float, default=DEFAULT_KERNEL_WIDTH)
    g.add_argument("--out", required=True)

    a = sub.add_parser("filter-apply", help="filter every row of a signal CSV")
    a.add_argument("--graph", required=True)
    a.add_argument("--filter", required=True)
    a.add_argument("--signals", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--method", choices=("exact", "spatial"), default="exact")
    a.add_argument("--kind", choices=KINDS, default="unnormalized")

    s = sub.add_parser("stability-sweep", help="measure filter drift under random perturbations")
    s.add_argument("--graph", required=True)
    s.add_argument("--filter", required=True, help=f"filter JSON path or preset: {', '.join(PRESETS)}")
    s.add_argument("--magnitudes", type=_float_list, default=[1e-4, 1e-3, 1e-2])
    s.add_argument("--trials", type=_positive_int, default=100)
    s.add_argument("--mode", choices=MODES, default="dense-gaussian")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--signals")
    s.add_argument("--kind", choices=KINDS)
    s.add_argument("--workers", type=_positive_int, default=1)
    s.add_argument("--strict", action="store_true", help="fail when edge-drop misses the target norm by >10%%")
    s.add_argument("--out", required=True)

    v = sub.add_parser("verify", help="run every randomized certification suite")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--instances", type=_positive_int, default=200)
    v.add_argument("--out", help="write the JSON report here")
    v.add_argument("--self-test-negative", action="store_true", help="flip one inequality; must exit 1")
    return p


def cmd_graph_gen(args) -> int:
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    if not args.kernel_width > 0:
        raise UsageError("--kernel-width must be positive")
    g = gen_geometric_graph(args.n, args.seed, args.kernel_width)
    meta = {
        "generator": "geometric-gaussian",
        "seed": args.seed,
        "kernel_width": args.kernel_width,
        "sparsity_threshold": SPARSITY_THRESHOLD,
    }
    save_graph(g, args.out, meta)
    print(f"wrote {args.out}: n={g.n}, edges={len(g.edges())}")
    return EXIT_OK


def cmd_filter_apply(args) -> int:
    for path in (args.graph, args.filter, args.signals):
        _existing(path)
    g = load_graph(args.graph)
    spec = load_filter(args.filter)
    signals = load_signals(args.signals, g.n)
    s = build_shift(g, args.kind)
    apply = apply_exact if args.method == "exact" else apply_spatial
    out = apply(spec, s, signals.T).T if len(signals) else signals
    if np.iscomplexobj(out):
        # complex outputs: real parts then imaginary parts on each row
        out = np.hstack([out.real, out.imag])
    write_signals(args.out, out)
    print(f"wrote {args.out}: {len(signals)} signals, method={args.method}")
    return EXIT_OK


def _resolve_filter(name: str, g, kind: str) -> tuple[FilterSpec, dict]:
    if name in PRESETS:
        lam = eig_symmetric(build_shift(g, kind)).eigenvalues
        if name == "lowpass-poly":
            spec = lowpass_polynomial(float(lam[-1]))
        elif name == "lowpass-cayley":
            spec = lowpass_cayley(float(lam[-1]))
        else:
            spec = allpass_arma(spectral_norm(build_shift(g, kind).matrix))
        return spec, {"preset": name, "description": PRESETS[name][1], "reconstruction": True}
    _existing(name)
    return load_filter(name), {"path": name, "reconstruction": False}


def cmd_stability_sweep(args) -> int:
    _existing(args.graph)
    _existing(args.signals)
    g = load_graph(args.graph)
    kind = args.kind or PRESETS.get(args.filter, ("unnormalized",))[0]
    spec, filter_meta = _resolve_filter(args.filter, g, kind)
    signals = None
    source = "random"
    if args.signals is not None:
        signals = load_signals(args.signals, g.n)
        source = "file"
        if len(signals) == 0:
            log.warning("%s holds no signals; using random signals instead", args.signals)
            signals = None
    cfg = SweepConfig(
        magnitudes=tuple(args.magnitudes),
        trials_per_magnitude=args.trials,
        mode=args.mode,
        base_seed=args.seed,
        kind=kind,
        signal_source=source,
        workers=args.workers,
        strict=args.strict,
    )
    shift = build_shift(g, kind)
    seminorm = certified_seminorm(spec, sweep_band(shift))
    records = stability_sweep(g, spec, cfg, signals, seminorm)
    write_sweep_csv(args.out, records)

    violations = sum(not r.certified for r in records)
    meta = {
        "command": "stability-sweep",
        "graph": {"path": args.graph, "n": g.n, "edges": len(g.edges()), "sparsity_threshold": SPARSITY_THRESHOLD},
        "shift_kind": kind,
        "norm_shift": spectral_norm(shift.matrix),
        "filter": {**spec.to_json(), **filter_meta},
        "seminorm": {
            "value": seminorm.value,
            "tail_estimate": seminorm.tail,
            "used_in_bound": seminorm.upper,
            "method": seminorm.method,
            **seminorm.details,
        },
        "magnitudes": list(cfg.magnitudes),
        "trials_per_magnitude": cfg.trials_per_magnitude,
        "mode": cfg.mode,
        "strict": cfg.strict,
        "base_seed": cfg.base_seed,
        "signals": {
            "source": "file" if signals is not None else "random",
            "path": args.signals,
            "count": len(signals) if signals is not None else cfg.n_random_signals,
        },
        "conventions": {
            "operator_norm": "spectral norm (largest singular value)",
            "rel_norm_E": "||E||_2 / ||shift||_2",
            "signal_error": "||g(D) f - g(D') f||_2 / ||g(D) f||_2",
            "bound": "seminorm * ((||D|| + 1) ||E|| / (1 - ||E||) + ||E||)",
            "float_format": "17 significant digits",
        },
        "rng": {
            "generator": "numpy Philox4x64-10 keyed by trial_seed",
            "trial_seed": "splitmix64 fold of (base_seed, magnitude_index, trial_index)",
        },
        "certification": {"rows": len(records), "violations": violations, "rtol": CERT_RTOL},
        "loglog_slope": loglog_slope(records) if len(cfg.magnitudes) > 1 else None,
    }
    meta_path = Path(args.out).with_suffix(".meta.json")
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    print(f"wrote {args.out} ({len(records)} rows) and {meta_path}; bound violations: {violations}")
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.instances < 1:
        raise UsageError("--instances must be at least 1")
    results = run_all(args.seed, args.instances, negative=args.self_test_negative)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name:<20} instances={r.instances:<5} worst_margin={r.worst:.3g}")
        for f in r.failures[:5]:
            print(f"     failing instance {f['instance']} (seed {f['seed']})")
    report = report_json(results, args.seed, args.instances)
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2) + "\n")
    return EXIT_OK if report["passed"] else EXIT_VERIFY


COMMANDS = {
    "graph-gen": cmd_graph_gen,
    "filter-apply": cmd_filter_apply,
    "stability-sweep": cmd_stability_sweep,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except NumericalError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InputError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

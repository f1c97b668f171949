"""Command-line interface.

Subcommands: solve (recover from a measurement-stream file), bounds,
experiment, figure, check.  Exit codes: 0 success, 1 check failure,
2 usage/config error.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from .bounds import (
    alpha_log_sup,
    alpha_one_exact,
    alpha_s_sup,
    invariant_alpha_closed_form,
    lyapunov_check,
    tightness_test,
)
from .distributions import (
    DiscreteDistribution,
    InvariantDistribution,
    from_fusion_frame,
    ronb,
    roots_of_unity,
)
from .errors import ConfigError, SubspaceActionError
from .experiments import (
    config_from_file,
    format_s,
    mc_moment_curves,
    noisy_bound_check,
    parse_s_value,
    reproduce_figure,
    resolve_distribution,
    resolve_vector,
    write_curves_csv,
)
from .linalg import SeededRng
from .solver import IidStream, InSubspaceNoise, run, run_from_stream, verify_error_identities
from .subspaces import Subspace, from_spanning, sample_invariant


def _read_measurement_stream(path):
    """Records of one subspace serialization followed by one measurement row."""
    tokens = iter(Path(path).read_text().split())
    pairs = []
    while True:
        try:
            w = Subspace._from_tokens(tokens)
        except StopIteration:
            break
        y = np.array([float(next(tokens)) for _ in range(w.ambient_dim)])
        pairs.append((w, y))
    if not pairs:
        raise ConfigError(f"no measurement records in {path}")
    return pairs


def _cmd_solve(args) -> int:
    pairs = _read_measurement_stream(args.stream)
    d = pairs[0][0].ambient_dim
    x0 = resolve_vector(args.x0, d, 0, "zero")
    estimate = run_from_stream(pairs, x0)
    line = " ".join(f"{v:.17g}" for v in estimate)
    if args.out:
        Path(args.out).write_text(line + "\n")
    else:
        print(line)
    return 0


def _cmd_bounds(args) -> int:
    dist = resolve_distribution(args.dist)
    s_values = [parse_s_value(tok) for tok in args.s.split(",")]
    rng = SeededRng(args.seed)
    print("s,value,method,stderr")
    for s in s_values:
        if isinstance(dist, InvariantDistribution):
            if dist.dim == dist.ambient_dim:
                est_value, method = 0.0, "closed_form"
            else:
                est = invariant_alpha_closed_form(dist.dim, dist.ambient_dim, s)
                est_value, method = est.value, est.method
            stderr = ""
        else:
            if s == 0:
                est = alpha_log_sup(dist, restarts=args.probes, rng=rng.derive(0))
            elif s == 1:
                est = alpha_one_exact(dist)
            else:
                est = alpha_s_sup(dist, s, restarts=args.probes, rng=rng.derive(int(s * 1000)))
            est_value, method = est.value, est.method
            stderr = "" if est.stderr is None else f"{est.stderr:.17g}"
        print(f"{format_s(s)},{est_value:.17g},{method},{stderr}")
    return 0


def _cmd_experiment(args) -> int:
    cfg = config_from_file(args.config)
    curves = mc_moment_curves(cfg, threads=args.threads)
    out_dir = Path(cfg.output or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    for s, curve in zip(cfg.s_list, curves):
        path = out_dir / f"experiment_s{format_s(s)}.csv"
        write_curves_csv(path, s, [(cfg.distribution, curve)])
        print(path)
    return 0


def _cmd_figure(args) -> int:
    written = reproduce_figure(args.which, args.seed, args.out,
                               trials=args.trials, n_iter=args.iterations,
                               threads=args.threads)
    for path in written:
        print(path)
    return 0


def _check_identities(seed: int) -> bool:
    rng = SeededRng(seed)
    ok = True
    for case in range(25):
        gen = rng.derive(case).generator
        d = int(gen.integers(2, 11))
        k = int(gen.integers(1, d + 1))
        if case % 2 == 0:
            dist = InvariantDistribution(k, d)
        else:
            n_atoms = int(gen.integers(2, 7))
            atoms = [sample_invariant(rng.derive(case, i), k, d) for i in range(n_atoms)]
            probs = gen.random(n_atoms)
            dist = DiscreteDistribution(atoms, probs / probs.sum())
        x_true = gen.standard_normal(d)
        x0 = gen.standard_normal(d)
        trace = run(IidStream(dist), x_true, x0, 30, rng=rng.derive(case, 999),
                    record=True)
        if not verify_error_identities(trace, x_true, x0):
            print(f"identities: FAIL at case {case}")
            ok = False
    print(f"identities: {'ok' if ok else 'FAILED'}")
    return ok


def _check_tightness(seed: int) -> bool:
    rng = SeededRng(seed)
    ok = True
    tight, spread = tightness_test(InvariantDistribution(1, 3), 1.0, probes=4,
                                   rng=rng.derive(1), mc_samples=50000)
    print(f"tightness invariant(1,3) s=1: tight={tight} spread={spread:.3g}")
    ok &= tight
    tight, spread = tightness_test(roots_of_unity(3), 1.0, probes=4, rng=rng.derive(2))
    print(f"tightness roots_of_unity(3) s=1: tight={tight} spread={spread:.3g}")
    ok &= tight
    tight, spread = tightness_test(ronb(2), 0.5, probes=4, rng=rng.derive(3))
    print(f"tightness ronb(2) s=1/2: tight={tight} spread={spread:.3g} (expected loose)")
    ok &= not tight
    return ok


def _check_noise(seed: int) -> bool:
    from .experiments import ExperimentConfig
    cfg = ExperimentConfig(dimension=10, distribution="ronb:10", x_true="unit-random",
                           trials=400, iterations=120, seed=seed, epsilon=0.01)
    report = noisy_bound_check(cfg, 1.0)
    print(f"noise ronb(10) eps=0.01 s=1: violations={report.violations}")
    return report.ok


def _check_lyapunov(seed: int) -> bool:
    ok = lyapunov_check(ronb(5), [0.5, 1.0, 2.0], seed=seed)
    print(f"lyapunov ronb(5): {'ok' if ok else 'FAILED'}")
    ok2 = lyapunov_check(InvariantDistribution(1, 3), [0.5, 1.0, 2.0], seed=seed)
    print(f"lyapunov invariant(1,3): {'ok' if ok2 else 'FAILED'}")
    return ok and ok2


_SUITES = {
    "identities": _check_identities,
    "tightness": _check_tightness,
    "noise": _check_noise,
    "lyapunov": _check_lyapunov,
}


def _cmd_check(args) -> int:
    return 0 if _SUITES[args.suite](args.seed) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subspace-action",
        description="Randomized subspace-action recovery, Kaczmarz bounds, "
                    "and error-moment experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="recover a vector from a measurement-stream file")
    p.add_argument("--stream", required=True, help="measurement-stream file")
    p.add_argument("--x0", default="zero", help="initial estimate spec")
    p.add_argument("--out", help="write the estimate here instead of stdout")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("bounds", help="Kaczmarz bounds of a distribution")
    p.add_argument("--dist", required=True,
                   help="builtin spec (invariant:k:d, ronb:d, block:d:k, roots:K) or file")
    p.add_argument("--s", required=True, help="comma list of orders; log or 0 = logarithmic")
    p.add_argument("--probes", type=int, default=64, help="optimizer restarts")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_experiment)

    p = sub.add_parser("figure", help="reproduce one of the four numerical examples")
    p.add_argument("--which", type=int, required=True, choices=[1, 2, 3, 4])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--iterations", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=_cmd_figure)

    p = sub.add_parser("check", help="run a verification suite")
    p.add_argument("--suite", required=True, choices=sorted(_SUITES))
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=_cmd_check)

    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SubspaceActionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))


if __name__ == "__main__":
    main()

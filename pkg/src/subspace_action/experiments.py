"""Monte Carlo error-moment engine, theoretical overlays, figure
reproduction, and experiment configuration.

Determinism contract: identical config + seed gives byte-identical CSV
output for any thread count.  Per-trial random streams are derived from the
trial index, and the reduction over trials happens in fixed index order.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bounds import alpha_one_exact, invariant_alpha_closed_form
from .distributions import (
    DiscreteDistribution,
    InvariantDistribution,
    block_onb,
    distribution_from_text,
    ronb,
    roots_of_unity,
    uniform_discrete,
)
from .errors import ConfigError, InvalidParameterError
from .linalg import SeededRng
from .solver import IidStream, InSubspaceNoise, run
from .subspaces import sample_invariant

_X_TRUE_TAG = 0x78747275


@dataclass
class ExperimentConfig:
    """Flat description of one Monte Carlo experiment."""
    dimension: int
    distribution: str
    x_true: str = "ones"
    x0: str = "zero"
    trials: int = 1
    iterations: int = 0
    s_list: list = field(default_factory=lambda: [1.0])
    seed: int = 0
    epsilon: float = 0.0
    output: str | None = None
    subspace_dim: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.iterations < 0:
            raise ConfigError(f"iterations must be >= 0, got {self.iterations}")
        if any(s < 0 for s in self.s_list):
            raise ConfigError("s_list entries must be >= 0 (0 = logarithmic)")


_CONFIG_KEYS = {"dimension", "subspace_dim", "distribution", "x_true", "x0",
                "trials", "iterations", "s_list", "seed", "epsilon", "output"}


def parse_s_value(token: str) -> float:
    token = token.strip()
    if token == "log":
        return 0.0
    try:
        s = float(token)
    except ValueError:
        raise ConfigError(f"bad s value {token!r}") from None
    if s < 0:
        raise ConfigError(f"s must be >= 0, got {s}")
    return s


def config_from_text(text: str) -> ExperimentConfig:
    """Parse the flat key = value format (one key per line, # comments)."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        raw[key] = value
    for required in ("dimension", "distribution"):
        if required not in raw:
            raise ConfigError(f"missing required key {required!r}")
    try:
        cfg = ExperimentConfig(
            dimension=int(raw["dimension"]),
            distribution=raw["distribution"],
            x_true=raw.get("x_true", "ones"),
            x0=raw.get("x0", "zero"),
            trials=int(raw.get("trials", "1")),
            iterations=int(raw.get("iterations", "0")),
            s_list=[parse_s_value(tok) for tok in raw.get("s_list", "1").split(",")],
            seed=int(raw.get("seed", "0")),
            epsilon=float(raw.get("epsilon", "0")),
            output=raw.get("output"),
            subspace_dim=int(raw["subspace_dim"]) if "subspace_dim" in raw else None,
        )
    except ValueError as exc:
        raise ConfigError(f"bad value in config: {exc}") from None
    return cfg


def config_from_file(path) -> ExperimentConfig:
    return config_from_text(Path(path).read_text())


def resolve_distribution(spec: str, dimension: int | None = None,
                         subspace_dim: int | None = None):
    """Builtin spec ("invariant:k:d", "ronb:d", "block:d:k", "roots:K") or a
    distribution file path."""
    tokens = spec.split(":")
    name, args = tokens[0], tokens[1:]
    try:
        if name == "invariant":
            if args:
                return InvariantDistribution(int(args[0]), int(args[1]))
            if subspace_dim is None or dimension is None:
                raise ConfigError("invariant law needs subspace_dim and dimension")
            return InvariantDistribution(subspace_dim, dimension)
        if name == "ronb":
            return ronb(int(args[0]) if args else dimension)
        if name in ("block", "block_onb"):
            if args:
                return block_onb(int(args[0]), int(args[1]))
            return block_onb(dimension, subspace_dim)
        if name in ("roots", "roots_of_unity"):
            return roots_of_unity(int(args[0]))
    except (IndexError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad distribution spec {spec!r}: {exc}") from None
    except InvalidParameterError as exc:
        raise ConfigError(f"bad distribution spec {spec!r}: {exc}") from None
    if os.path.exists(spec):
        return distribution_from_text(Path(spec).read_text())
    raise ConfigError(f"unknown distribution {spec!r} (not a builtin, not a file)")


def resolve_vector(spec, d: int, seed: int, default: str):
    """x_true / x0 spec: "ones", "zero", "unit-random", or a comma list."""
    if spec is None:
        spec = default
    if not isinstance(spec, str):
        vec = np.asarray(spec, dtype=float)
    elif spec == "ones":
        vec = np.ones(d)
    elif spec == "zero":
        vec = np.zeros(d)
    elif spec == "unit-random":
        g = SeededRng(seed, _X_TRUE_TAG).generator.standard_normal(d)
        vec = g / np.linalg.norm(g)
    else:
        try:
            vec = np.array([float(tok) for tok in spec.split(",")])
        except ValueError:
            raise ConfigError(f"bad vector spec {spec!r}") from None
    if vec.shape != (d,):
        raise ConfigError(f"vector spec {spec!r} has length {vec.size}, expected {d}")
    return vec


def _trial_chunk(dist, x_true, x0, n_iter, epsilon, seed, stream, lo, hi):
    strategy = IidStream(dist)
    noise = InSubspaceNoise(epsilon) if epsilon > 0 else None
    base = SeededRng(seed, stream)
    out = np.empty((hi - lo, n_iter + 1))
    for j, t in enumerate(range(lo, hi)):
        trace = run(strategy, x_true, x0, n_iter, noise=noise, rng=base.derive(t))
        out[j] = trace.sq_errors
    return out


def collect_sq_error_trials(dist, x_true, x0, n_iter: int, trials: int, seed: int,
                            stream: int = 0, epsilon: float = 0.0,
                            threads: int = 1) -> np.ndarray:
    """(trials, n_iter + 1) matrix of squared errors from independent seeded
    runs; trial t uses stream (seed, stream, t) so any thread count yields
    the same matrix."""
    if threads <= 1 or trials <= 1:
        return _trial_chunk(dist, x_true, x0, n_iter, epsilon, seed, stream, 0, trials)
    bounds = np.linspace(0, trials, threads + 1).astype(int)
    chunks = [(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        futures = [pool.submit(_trial_chunk, dist, x_true, x0, n_iter,
                               epsilon, seed, stream, lo, hi)
                   for lo, hi in chunks]
        parts = [f.result() for f in futures]
    return np.vstack(parts)


@dataclass
class MomentCurve:
    """Monte Carlo estimate of the order-s error moment versus iteration.

    values[n] = (mean_t ||x - x_n||^(2s))^(1/s) for s > 0, and
    exp(mean_t log ||x - x_n||^2) for s = 0; values[0] is the common initial
    squared error exactly.  stderr is the delta-method standard error of the
    transformed statistic; bound[n] = alpha^n * values[0] when an alpha is
    attached.
    """
    s: float
    values: np.ndarray
    stderr: np.ndarray
    bound: np.ndarray | None = None


def moment_curve_from_trials(sq: np.ndarray, s: float,
                             bound_alpha: float | None = None) -> MomentCurve:
    sq = np.asarray(sq, dtype=float)
    trials, _ = sq.shape
    if s == 0:
        with np.errstate(divide="ignore"):
            logs = np.log(sq)
        mean_log = logs.mean(axis=0)  # -inf wherever a trial hit exact zero
        values = np.exp(mean_log)
        if trials > 1:
            with np.errstate(invalid="ignore"):
                sd = np.where(np.isfinite(mean_log), logs.std(axis=0, ddof=1), 0.0)
            stderr = values * sd / math.sqrt(trials)
        else:
            stderr = np.zeros_like(values)
    else:
        y = sq ** s
        m = y.mean(axis=0)
        values = m ** (1.0 / s)
        if trials > 1:
            se_m = y.std(axis=0, ddof=1) / math.sqrt(trials)
            with np.errstate(divide="ignore", invalid="ignore"):
                stderr = np.where(m > 0, se_m * (1.0 / s) * m ** (1.0 / s - 1.0), 0.0)
        else:
            stderr = np.zeros_like(values)
    values[0] = sq[0, 0]  # all trials identical at n = 0
    stderr[0] = 0.0
    bound = None
    if bound_alpha is not None:
        bound = np.array(theoretical_curve(bound_alpha, sq.shape[1] - 1, sq[0, 0]))
    return MomentCurve(s=s, values=values, stderr=stderr, bound=bound)


def theoretical_curve(alpha: float, n_max: int, initial_sq_error: float) -> list[float]:
    """[alpha^n * initial for n = 0..n_max]."""
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParameterError(f"alpha must be in [0, 1], got {alpha}")
    return [alpha ** n * initial_sq_error for n in range(n_max + 1)]


def mc_moment_curves(cfg: ExperimentConfig, alphas: dict | None = None,
                     threads: int = 1) -> list[MomentCurve]:
    """Run cfg.trials seeded solver runs and aggregate one MomentCurve per s.

    Bound overlays are attached from `alphas` (a map s -> alpha) when given;
    for the invariant law with k < d they default to the closed forms.
    """
    dist = resolve_distribution(cfg.distribution, cfg.dimension, cfg.subspace_dim)
    if dist.ambient_dim != cfg.dimension:
        raise ConfigError(f"distribution lives in R^{dist.ambient_dim}, "
                          f"config says dimension {cfg.dimension}")
    x_true = resolve_vector(cfg.x_true, cfg.dimension, cfg.seed, "ones")
    x0 = resolve_vector(cfg.x0, cfg.dimension, cfg.seed, "zero")
    if alphas is None and isinstance(dist, InvariantDistribution) \
            and dist.dim < dist.ambient_dim:
        alphas = {s: invariant_alpha_closed_form(dist.dim, dist.ambient_dim, s).value
                  for s in cfg.s_list}
    sq = collect_sq_error_trials(dist, x_true, x0, cfg.iterations, cfg.trials,
                                 cfg.seed, epsilon=cfg.epsilon, threads=threads)
    return [moment_curve_from_trials(sq, s, (alphas or {}).get(s)) for s in cfg.s_list]


def format_s(s: float) -> str:
    return "log" if s == 0 else f"{s:g}"


def write_curves_csv(path, s: float, named_curves) -> None:
    """One CSV per (figure, s): fixed header n,s,estimate,stderr,bound with
    one  "# law: <name>"  comment line before each law's block."""
    s_label = format_s(s)
    lines = ["n,s,estimate,stderr,bound"]
    for name, curve in named_curves:
        lines.append(f"# law: {name}")
        for n in range(len(curve.values)):
            bound = f"{curve.bound[n]:.17g}" if curve.bound is not None else ""
            lines.append(f"{n},{s_label},{curve.values[n]:.17g},"
                         f"{curve.stderr[n]:.17g},{bound}")
    Path(path).write_text("\n".join(lines) + "\n")


def _figure_laws(which: int, seed: int):
    """(laws, x_true, s_list, default_trials, default_iters, extra_files)."""
    if which == 1:
        laws = [("roots_of_unity_3", roots_of_unity(3)),
                ("roots_of_unity_5", roots_of_unity(5)),
                ("invariant_1_2", InvariantDistribution(1, 2))]
        return laws, np.array([0.2296, 0.9361]), [2.0, 1.0, 0.5, 0.0], 3000, 40, {}
    if which == 2:
        extra = {}
        laws = []
        for count in (5, 8):
            base = SeededRng(seed, 2)
            atoms = [sample_invariant(base.derive(count, i), 2, 5) for i in range(count)]
            law = uniform_discrete(atoms)
            laws.append((f"random{count}", law))
            extra[f"fig2_subspaces{count}.txt"] = law.to_text()
        laws.append(("invariant_2_5", InvariantDistribution(2, 5)))
        return laws, np.ones(5), [2.0, 1.0, 0.5, 0.0], 3000, 40, extra
    if which == 3:
        laws = [("ronb_100", ronb(100)),
                ("invariant_1_100", InvariantDistribution(1, 100))]
        return laws, np.ones(100), [2.0, 1.0, 0.5], 9000, 600, {}
    if which == 4:
        # 25 coordinate blocks are all visited well before n = 600 in every
        # trial, which zeroes the block curve exactly; 200 iterations keep
        # both laws in the statistically comparable regime.
        laws = [("block_onb_100_4", block_onb(100, 4)),
                ("invariant_4_100", InvariantDistribution(4, 100))]
        return laws, np.ones(100), [2.0, 1.0, 0.5], 9000, 200, {}
    raise ConfigError(f"figure must be 1..4, got {which}")


def reproduce_figure(which: int, seed: int, out_dir, trials: int | None = None,
                     n_iter: int | None = None, threads: int = 1) -> list[str]:
    """Rerun one of the four numerical examples and write one CSV per s.

    Returns the list of written file paths.  The invariant law's curves
    carry the closed-form bound overlays.
    """
    laws, x_true, s_list, default_trials, default_iters, extra = _figure_laws(which, seed)
    trials = default_trials if trials is None else trials
    n_iter = default_iters if n_iter is None else n_iter
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    x0 = np.zeros_like(x_true)
    curves_by_law = []
    for law_index, (name, dist) in enumerate(laws):
        sq = collect_sq_error_trials(dist, x_true, x0, n_iter, trials, seed,
                                     stream=law_index, threads=threads)
        if isinstance(dist, InvariantDistribution) and dist.dim < dist.ambient_dim:
            alphas = {s: invariant_alpha_closed_form(dist.dim, dist.ambient_dim, s).value
                      for s in s_list}
        else:
            alphas = {}
        curves = {s: moment_curve_from_trials(sq, s, alphas.get(s)) for s in s_list}
        curves_by_law.append((name, curves))

    written = []
    for s in s_list:
        path = out_dir / f"fig{which}_s{format_s(s)}.csv"
        write_curves_csv(path, s, [(name, curves[s]) for name, curves in curves_by_law])
        written.append(str(path))
    for fname, text in extra.items():
        path = out_dir / fname
        path.write_text(text)
        written.append(str(path))
    return written


@dataclass
class NoisyBoundReport:
    """Per-iteration comparison of a noisy run against the robustness bound."""
    s: float
    alpha: float
    epsilon: float
    estimates: np.ndarray
    stderrs: np.ndarray
    bounds: np.ndarray
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def noisy_bound_check(cfg: ExperimentConfig, s: float,
                      alpha_s: float | None = None, threads: int = 1) -> NoisyBoundReport:
    """Monte Carlo check of the noisy-measurement error bound of order s.

    For 0 < s <= 1 the raw moment E||x*_n - x||^(2s) is compared against
    alpha_s^(ns) ||x*_0 - x||^(2s) + eps^(2s) / (1 - alpha_s^s); for s >= 1
    the transformed moment (E ...)^(1/s) is compared against
    alpha_s^n ||x*_0 - x||^2 + eps^2 / (1 - alpha_s).  A step is flagged
    when estimate - 4 stderr exceeds the bound.
    """
    if s <= 0:
        raise ConfigError(f"noisy bound check needs s > 0, got {s}")
    dist = resolve_distribution(cfg.distribution, cfg.dimension, cfg.subspace_dim)
    if alpha_s is None:
        if isinstance(dist, InvariantDistribution) and dist.dim < dist.ambient_dim:
            alpha_s = invariant_alpha_closed_form(dist.dim, dist.ambient_dim, s).value
        elif s == 1.0:
            alpha_s = alpha_one_exact(dist).value
        else:
            raise ConfigError("alpha_s must be supplied for this law and order")
    if not 0.0 < alpha_s < 1.0:
        raise ConfigError(f"need 0 < alpha_s < 1, got {alpha_s}")

    x_true = resolve_vector(cfg.x_true, cfg.dimension, cfg.seed, "ones")
    x0 = resolve_vector(cfg.x0, cfg.dimension, cfg.seed, "zero")
    sq = collect_sq_error_trials(dist, x_true, x0, cfg.iterations, cfg.trials,
                                 cfg.seed, epsilon=cfg.epsilon, threads=threads)
    trials = sq.shape[0]
    init_sq = sq[0, 0]
    ns = np.arange(cfg.iterations + 1)
    eps = cfg.epsilon

    if s >= 1.0:
        curve = moment_curve_from_trials(sq, s)
        estimates, stderrs = curve.values, curve.stderr
        bounds = alpha_s ** ns * init_sq + eps ** 2 / (1.0 - alpha_s)
    else:
        y = sq ** s
        estimates = y.mean(axis=0)
        stderrs = (y.std(axis=0, ddof=1) / math.sqrt(trials)
                   if trials > 1 else np.zeros_like(estimates))
        bounds = alpha_s ** (ns * s) * init_sq ** s + eps ** (2 * s) / (1.0 - alpha_s ** s)

    violations = [int(n) for n in ns if estimates[n] - 4.0 * stderrs[n] > bounds[n]]
    return NoisyBoundReport(s=s, alpha=alpha_s, epsilon=eps, estimates=estimates,
                            stderrs=stderrs, bounds=bounds, violations=violations)

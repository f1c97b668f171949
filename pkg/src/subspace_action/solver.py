"""The subspace-action iteration x_n = x_{n-1} + y_n - P_{W_n}(x_{n-1})
under cyclic, randomized-discrete, and i.i.d.-stream control, with optional
in-subspace measurement noise and full squared-error traces."""

import sys
from dataclasses import dataclass

import numpy as np

from .distributions import DiscreteDistribution, InvariantDistribution
from .errors import DimensionMismatchError, InvalidParameterError
from .linalg import SeededRng, orthonormalize
from .subspaces import Subspace

_NOISE_TAG = 0x6E6F6973  # stream tag for the noise sub-stream


@dataclass(frozen=True)
class Cyclic:
    """Deterministic control: subspace n is frame.subspaces[(n-1) mod N]."""
    frame: object


@dataclass(frozen=True)
class RandomDiscrete:
    """I.i.d. draws from a discrete law over a finite subspace collection."""
    dist: DiscreteDistribution

    def __post_init__(self):
        if not isinstance(self.dist, DiscreteDistribution):
            raise InvalidParameterError("RandomDiscrete requires a discrete law")


@dataclass(frozen=True)
class IidStream:
    """I.i.d. draws from any subspace distribution (online/streaming view)."""
    dist: object


@dataclass(frozen=True)
class InSubspaceNoise:
    """Per-step noise eps_n in W_n with ||eps_n|| <= epsilon.

    Direction uniform in W_n, magnitude uniform in [0, epsilon]; drawn from
    a dedicated sub-stream so the subspace draw sequence is unaffected.
    """
    epsilon: float
    rng_stream: int = 0


@dataclass
class SolveTrace:
    """Per-iteration record of one solver run.

    sq_errors[n] = ||x_true - x_n||^2 for n = 0..N (nonincreasing when the
    run is noiseless); chosen[n-1] identifies the subspace used at step n
    (atom index, or "stream" for invariant draws).
    """
    sq_errors: np.ndarray
    chosen: list
    estimate: np.ndarray
    noisy: bool = False
    subspaces: list | None = None
    noise_vectors: list | None = None


def step(x_prev: np.ndarray, w: Subspace, y: np.ndarray) -> np.ndarray:
    """One subspace action: x_prev + y - P_W(x_prev).

    The measurement is first projected onto W, so slightly off-subspace
    inputs are handled without loss of generality.
    """
    x_prev = np.asarray(x_prev, dtype=float)
    y = np.asarray(y, dtype=float)
    if x_prev.shape != (w.ambient_dim,) or y.shape != (w.ambient_dim,):
        raise DimensionMismatchError("step: vector lengths must equal the ambient dimension")
    y_in = w.project(y)
    assert np.linalg.norm(y_in - y) <= 1e-9 * max(1.0, np.linalg.norm(y)), \
        "measurement is not in the stated subspace"
    return x_prev + y_in - w.project(x_prev)


def _noise_draw(gen: np.random.Generator, basis: np.ndarray, epsilon: float) -> np.ndarray:
    k = basis.shape[1]
    g = gen.standard_normal(k)
    g /= np.linalg.norm(g)
    return (epsilon * gen.random()) * (basis @ g)


def run(strategy, x_true: np.ndarray, x0: np.ndarray, n_iter: int,
        noise: InSubspaceNoise | None = None, rng: SeededRng | None = None,
        record: bool = False) -> SolveTrace:
    """Run the subspace-action iteration for n_iter steps.

    x_true is used only to form the measurements y_n = P_{W_n}(x_true)
    (plus noise) and the error trace; deterministic given (inputs, rng).
    Set record=True to keep the chosen subspaces and noise vectors for
    identity checking.
    """
    x_true = np.asarray(x_true, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    if x_true.shape != x0.shape or x_true.ndim != 1:
        raise DimensionMismatchError("x_true and x0 must be vectors of equal length")
    if n_iter < 0:
        raise InvalidParameterError(f"n_iter must be >= 0, got {n_iter}")
    d = x_true.shape[0]
    rng = rng or SeededRng(0)
    noisy = noise is not None and noise.epsilon > 0
    noise_gen = rng.derive(_NOISE_TAG, noise.rng_stream).generator if noisy else None

    if isinstance(strategy, Cyclic):
        atoms = strategy.frame.subspaces
        picks = [(n % len(atoms)) for n in range(n_iter)]
        stream_ids = picks
    elif isinstance(strategy, (RandomDiscrete, IidStream)) and \
            isinstance(getattr(strategy, "dist", None), DiscreteDistribution):
        dist = strategy.dist
        atoms = dist.atoms
        gen = rng.generator
        us = gen.random(n_iter)
        picks = [int(min(i, len(atoms) - 1))
                 for i in np.searchsorted(dist._cum, us, side="right")]
        stream_ids = picks
    elif isinstance(strategy, IidStream) and isinstance(strategy.dist, InvariantDistribution):
        dist = strategy.dist
        if dist.ambient_dim != d:
            raise DimensionMismatchError("strategy subspaces do not match the vector length")
        gen = rng.generator
        k = dist.dim
        gaussians = gen.standard_normal((n_iter, d, k)) if n_iter else None
        atoms = None
        picks = None
        stream_ids = ["stream"] * n_iter
    else:
        raise InvalidParameterError(f"unsupported control strategy {strategy!r}")

    if any(w.ambient_dim != d for w in (atoms or ())):
        raise DimensionMismatchError("strategy subspaces do not match the vector length")

    if atoms is not None:
        bases = [w.basis for w in atoms]
        clean_ys = [w.project(x_true) for w in atoms]

    sq_errors = np.empty(n_iter + 1)
    r = x_true - x0
    sq_errors[0] = r @ r
    x = x0.copy()
    used_subspaces = [] if record else None
    used_noise = [] if record else None

    for n in range(n_iter):
        if atoms is not None:
            i = picks[n]
            basis = bases[i]
            y = clean_ys[i]
            w = atoms[i]
        else:
            basis = orthonormalize(gaussians[n])
            y = basis @ (basis.T @ x_true)
            w = None
        eps_vec = _noise_draw(noise_gen, basis, noise.epsilon) if noisy else None
        if eps_vec is not None:
            y = y + eps_vec
        x = x + y - basis @ (basis.T @ x)
        r = x_true - x
        sq_errors[n + 1] = r @ r
        if record:
            used_subspaces.append(w if w is not None else Subspace(basis, validate=False))
            used_noise.append(eps_vec if eps_vec is not None else np.zeros(d))

    return SolveTrace(sq_errors=sq_errors, chosen=list(stream_ids), estimate=x,
                      noisy=noisy, subspaces=used_subspaces, noise_vectors=used_noise)


def run_from_stream(pairs, x0: np.ndarray) -> np.ndarray:
    """Genuine recovery: apply one subspace action per (W, y) measurement pair."""
    x = np.asarray(x0, dtype=float).copy()
    for w, y in pairs:
        x = step(x, w, y)
    return x


def verify_error_identities(trace: SolveTrace, x_true: np.ndarray, x0: np.ndarray,
                            atol_step: float = 1e-10, atol_chain: float = 1e-8,
                            diagnostics=sys.stderr) -> bool:
    """Check the exact error algebra of a recorded noiseless run.

    Per step: the squared error drops by exactly the squared projected
    residual; the cumulative product form with unit-residual factors holds;
    and the residual equals the composed complementary projections applied
    to the initial residual.  Noisy traces are not applicable and pass
    vacuously.  Returns False (with diagnostics) on any violation.
    """
    if trace.noisy:
        return True
    if trace.subspaces is None:
        raise InvalidParameterError("trace was not recorded with record=True")
    x_true = np.asarray(x_true, dtype=float)
    x = np.asarray(x0, dtype=float).copy()
    prod = trace.sq_errors[0]
    composed = x_true - x
    ok = True
    for n, w in enumerate(trace.subspaces, start=1):
        prev_sq = float(np.dot(x_true - x, x_true - x))
        proj_res = w.project(x_true - x)
        drop = float(proj_res @ proj_res)
        x = x + w.project(x_true) - w.project(x)
        sq = float(np.dot(x_true - x, x_true - x))
        if abs(sq - (prev_sq - drop)) > atol_step:
            print(f"step identity failed at n={n}: {sq} vs {prev_sq - drop}",
                  file=diagnostics)
            ok = False
        if prev_sq > 0:
            prod *= max(1.0 - drop / prev_sq, 0.0)
        if abs(sq - prod) > atol_chain * max(1.0, trace.sq_errors[0]):
            print(f"product identity failed at n={n}: {sq} vs {prod}",
                  file=diagnostics)
            ok = False
        composed = composed - w.project(composed)
        if np.linalg.norm(composed - (x_true - x)) > atol_chain:
            print(f"composed-projection identity failed at n={n}", file=diagnostics)
            ok = False
    return ok


def trace_to_csv(trace: SolveTrace) -> str:
    """CSV dump: header n,sq_error,chosen; the n = 0 row has no chosen entry."""
    lines = ["n,sq_error,chosen"]
    lines.append(f"0,{trace.sq_errors[0]:.17g},")
    for n, ident in enumerate(trace.chosen, start=1):
        lines.append(f"{n},{trace.sq_errors[n]:.17g},{ident}")
    return "\n".join(lines) + "\n"

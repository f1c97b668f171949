"""Dense real linear algebra and randomness primitives.

Everything here works on plain numpy arrays: vectors are 1-d float arrays,
matrices are 2-d float arrays in row-major layout.
"""

import math

import numpy as np
from scipy.special import digamma as _scipy_digamma

from .errors import (
    DomainError,
    NoConvergenceError,
    NotSymmetricError,
    RankDeficientError,
    ToleranceNotReachedError,
)

DEFAULT_TOL = 1e-10


class SeededRng:
    """Reproducible random stream addressed by (seed, stream_id).

    Identical (seed, stream_id) pairs replay the identical draw sequence;
    distinct stream ids give statistically independent streams, so per-trial
    streams can run concurrently without shared state.  ``derive`` appends
    extra tags to the stream address, which is how sub-streams (per trial,
    per noise source) are carved out deterministically.
    """

    def __init__(self, seed: int, stream_id: int = 0, _tags: tuple = ()):
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self._tags = tuple(int(t) for t in _tags)
        self._generator = None

    def derive(self, *tags) -> "SeededRng":
        """A fresh independent stream addressed by the extra tags."""
        return SeededRng(self.seed, self.stream_id, self._tags + tags)

    @property
    def generator(self) -> np.random.Generator:
        if self._generator is None:
            entropy = [self.seed & 0xFFFFFFFFFFFFFFFF,
                       self.stream_id & 0xFFFFFFFFFFFFFFFF,
                       *[t & 0xFFFFFFFFFFFFFFFF for t in self._tags]]
            self._generator = np.random.default_rng(np.random.SeedSequence(entropy))
        return self._generator

    def __repr__(self):
        return f"SeededRng(seed={self.seed}, stream_id={self.stream_id}, tags={self._tags})"


def gaussian_matrix(rng: SeededRng | np.random.Generator, d: int, k: int) -> np.ndarray:
    """d x k matrix of i.i.d. standard normals from the given stream."""
    gen = rng.generator if isinstance(rng, SeededRng) else rng
    return gen.standard_normal((d, k))


def orthonormalize(m: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of span(m) via Householder QR with positive pivots.

    The positive-diagonal sign convention makes the result a deterministic
    canonical basis of the span.  Raises RankDeficientError when a pivot
    magnitude falls at or below tol.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    d, k = m.shape
    if k > d:
        raise RankDeficientError(f"more columns ({k}) than rows ({d})")
    if k == 1:
        # QR of one column with a positive pivot is plain normalization.
        norm = float(np.linalg.norm(m[:, 0]))
        if norm <= tol:
            raise RankDeficientError(f"pivot {norm:g} <= tol {tol:g}")
        return m / norm
    q, r = np.linalg.qr(m)
    pivots = np.abs(np.diag(r))
    if np.any(pivots <= tol):
        raise RankDeficientError(
            f"pivot {pivots.min():g} <= tol {tol:g} (rank-deficient columns)")
    signs = np.sign(np.diag(r))
    return q * signs


def sym_eig(a: np.ndarray, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix.

    Returns (eigenvalues ascending, eigenvectors as columns).  Backed by
    LAPACK's symmetric solver, which satisfies the accuracy contract
    (residual and orthogonality within d * 1e-9) for the small dense
    matrices used here.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetricError(f"expected square matrix, got shape {a.shape}")
    if np.max(np.abs(a - a.T)) > 1e-10:
        raise NotSymmetricError("matrix is not symmetric within 1e-10")
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(str(exc)) from exc
    return w, v


def _leg_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return nodes, weights


_GL_LO = _leg_rule(15)
_GL_HI = _leg_rule(31)


def _panel_integrals(f, a: float, b: float) -> tuple[float, float]:
    """(coarse, fine) Gauss-Legendre values of f over [a, b]."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    xs_lo = mid + half * _GL_LO[0]
    xs_hi = mid + half * _GL_HI[0]
    lo = half * float(np.dot(_GL_LO[1], f(xs_lo)))
    hi = half * float(np.dot(_GL_HI[1], f(xs_hi)))
    return lo, hi


def quadrature_01(f, singular_at_zero: bool = False, singular_at_one: bool = False,
                  tol: float = 1e-10, max_panels: int = 4096) -> float:
    """Adaptive composite Gauss-Legendre integral of f over (0, 1).

    Endpoint flags request geometric subdivision toward that endpoint, which
    handles logarithmic behaviour at 0 and integrable power behaviour at 1.
    All nodes are interior, so f is never evaluated at 0 or 1; panels
    touching 1 are kept wide enough (>= ~1e-12) that 1 - x does not round
    away at the nodes.  Raises ToleranceNotReachedError if the absolute
    error estimate cannot be pushed below tol within the panel budget.
    """
    min_width = 2.0 ** -40
    breaks = [0.0]
    if singular_at_zero:
        breaks.extend(2.0 ** -j for j in range(45, 0, -1))
    else:
        breaks.append(0.5)
    if singular_at_one:
        breaks.extend(1.0 - 2.0 ** -j for j in range(1, 41))
    breaks.append(1.0)
    breaks = sorted(set(breaks))

    f_vec = lambda xs: np.asarray(f(xs), dtype=float)

    def make_panel(a, b):
        lo, hi = _panel_integrals(f_vec, a, b)
        err = abs(hi - lo)
        if not math.isfinite(err) or not math.isfinite(hi):
            err, hi = math.inf, 0.0
        return (err, a, b, hi)

    panels = [make_panel(a, b) for a, b in zip(breaks[:-1], breaks[1:])]

    while True:
        total_err = math.fsum(p[0] for p in panels)
        if total_err < tol:
            break
        splittable = [p for p in panels if p[2] - p[1] >= 2.0 * min_width]
        if not splittable or len(panels) >= max_panels:
            raise ToleranceNotReachedError(
                f"error estimate {total_err:g} > tol {tol:g} after {len(panels)} panels")
        worst = max(splittable, key=lambda p: p[0])
        panels.remove(worst)
        _, a, b, _ = worst
        mid = 0.5 * (a + b)
        panels.append(make_panel(a, mid))
        panels.append(make_panel(mid, b))

    return math.fsum(p[3] for p in panels)


def ln_gamma(x: float) -> float:
    """log Gamma(x) for x > 0."""
    if x <= 0:
        raise DomainError(f"ln_gamma needs x > 0, got {x}")
    return math.lgamma(x)


def digamma(x: float) -> float:
    """Digamma (psi) function for x > 0."""
    if x <= 0:
        raise DomainError(f"digamma needs x > 0, got {x}")
    return float(_scipy_digamma(x))


def log_beta(a: float, b: float) -> float:
    """log B(a, b) = log Gamma(a) + log Gamma(b) - log Gamma(a + b)."""
    if a <= 0 or b <= 0:
        raise DomainError(f"log_beta needs positive arguments, got ({a}, {b})")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)

"""Kaczmarz bounds for subspace distributions.

The bound of order s for a random subspace W is

    alpha_s = sup over unit x of ( E[(1 - ||P_W(x)||^2)^s] )^(1/s),

and the logarithmic bound is the s -> 0 limit, exp(sup E log(1 - ||P_W x||^2)).
For discrete laws the sup is approximated from below by multistart projected
gradient ascent on the sphere; for the invariant law on G(k, d) both bounds
have closed forms in Beta/digamma functions, cross-checkable by quadrature
of the reduced radial integral.  s = 0 encodes the logarithmic bound
throughout the API.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .distributions import DiscreteDistribution, InvariantDistribution
from .errors import InvalidParameterError, UnsupportedVariantError
from .linalg import SeededRng, digamma, log_beta, quadrature_01, sym_eig

_GRAD_CLAMP = 1e-12  # floor on 1 - ||P x||^2 inside gradient factors


@dataclass(frozen=True)
class BoundEstimate:
    """A Kaczmarz bound value together with how it was obtained.

    ``s`` = 0 encodes the logarithmic bound.  Values from the sphere
    optimizer are lower bounds on the true sup (local ascent); values from
    exact_eigen / closed_form / quadrature are exact up to round-off.
    """
    value: float
    s: float
    method: str  # exact_eigen | optimizer | closed_form | quadrature | monte_carlo
    attaining_x: np.ndarray | None = None
    stderr: float | None = None


def alpha_one_exact(dist) -> BoundEstimate:
    """alpha_1 = 1 - lambda_min(E[P_W]), exact for any law.

    The order-1 potential is linear in the projector, so the sup over the
    sphere is attained at the bottom eigenvector of the expected projection.
    """
    evals, evecs = sym_eig(dist.expected_projection())
    value = min(max(1.0 - float(evals[0]), 0.0), 1.0)
    return BoundEstimate(value, 1.0, "exact_eigen", attaining_x=evecs[:, 0].copy())


def _sphere_ascent(value_fn, grad_fn, x0: np.ndarray, max_iter: int, tol: float):
    """Projected gradient ascent on the unit sphere with Armijo backtracking.

    Returns (x, f(x)) at the last accepted iterate.  The retraction is plain
    normalization; the tangent gradient is g - (g.x) x.
    """
    x = np.asarray(x0, dtype=float)
    x = x / np.linalg.norm(x)
    fx = value_fn(x)
    step = 0.5
    for _ in range(max_iter):
        g = grad_fn(x)
        gt = g - (g @ x) * x
        gn = float(np.linalg.norm(gt))
        if gn < tol:
            break
        accepted = False
        while step > 1e-18:
            xn = x + step * gt
            xn /= np.linalg.norm(xn)
            fn = value_fn(xn)
            if fn >= fx + 1e-4 * step * gn * gn:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        x, fx = xn, fn
        step = min(step * 2.0, 1.0)
    return x, fx


def _structured_starts(dist: DiscreteDistribution) -> list[np.ndarray]:
    """Eigenvectors of E[P_W], atom basis columns, and the normalized ones
    vector: these hit the known extremizers of the canonical examples."""
    d = dist.ambient_dim
    starts = []
    evals, evecs = sym_eig(dist.expected_projection())
    starts.append(evecs[:, 0].copy())
    starts.append(evecs[:, -1].copy())
    for atom in dist.atoms:
        for j in range(atom.dim):
            starts.append(atom.basis[:, j].copy())
    starts.append(np.full(d, 1.0 / math.sqrt(d)))
    return starts


def _random_starts(d: int, restarts: int, rng: SeededRng | None) -> list[np.ndarray]:
    gen = (rng or SeededRng(0)).generator
    starts = []
    for _ in range(restarts):
        g = gen.standard_normal(d)
        starts.append(g / np.linalg.norm(g))
    return starts


def alpha_s_sup(dist: DiscreteDistribution, s: float, restarts: int = 64,
                max_iter: int = 10000, tol: float = 1e-10,
                rng: SeededRng | None = None) -> BoundEstimate:
    """Order-s Kaczmarz bound of a discrete law by multistart sphere ascent.

    The reported value is (max found local maximum of the potential)^(1/s),
    a lower bound on the true sup; method "optimizer" records that.  For
    s < 1 the gradient factor (1-t)^(s-1) blows up near atom spans and is
    clamped, which only caps the repulsive step away from the atom.
    """
    if not isinstance(dist, DiscreteDistribution):
        raise UnsupportedVariantError(
            "invariant law: the potential is x-independent, use invariant_alpha_closed_form")
    if s <= 0:
        raise InvalidParameterError(f"alpha_s_sup needs s > 0, got {s}")

    probs = dist.probs

    def value_fn(x):
        return float(np.dot(probs, dist.complement_masses(x) ** s))

    def grad_fn(x):
        u = np.maximum(dist.complement_masses(x), _GRAD_CLAMP)
        return -2.0 * s * dist.apply_weighted_projectors(x, probs * u ** (s - 1.0))

    best_f, best_x = -np.inf, None
    for x0 in _structured_starts(dist) + _random_starts(dist.ambient_dim, restarts, rng):
        x, fx = _sphere_ascent(value_fn, grad_fn, x0, max_iter, tol)
        if fx > best_f:
            best_f, best_x = fx, x
    value = min(max(best_f, 0.0) ** (1.0 / s), 1.0)
    return BoundEstimate(value, s, "optimizer", attaining_x=best_x)


def alpha_log_sup(dist: DiscreteDistribution, restarts: int = 64,
                  max_iter: int = 10000, tol: float = 1e-10,
                  rng: SeededRng | None = None) -> BoundEstimate:
    """Logarithmic Kaczmarz bound of a discrete law by sphere ascent.

    Starts landing inside an atom span (potential -inf) are nudged off it
    once and skipped if still degenerate: the sup semantics ignore the
    measure-zero -inf set.
    """
    if not isinstance(dist, DiscreteDistribution):
        raise UnsupportedVariantError(
            "invariant law: the potential is x-independent, use invariant_alpha_closed_form")

    probs = dist.probs

    def value_fn(x):
        return dist.potential_log(x / np.linalg.norm(x))

    def grad_fn(x):
        u = np.maximum(dist.complement_masses(x), _GRAD_CLAMP)
        return -2.0 * dist.apply_weighted_projectors(x, probs / u)

    nudge = (rng or SeededRng(0)).derive(1).generator
    best_f, best_x = -np.inf, None
    for x0 in _structured_starts(dist) + _random_starts(dist.ambient_dim, restarts, rng):
        if value_fn(x0) == -np.inf:
            x0 = x0 + 1e-3 * nudge.standard_normal(dist.ambient_dim)
            x0 /= np.linalg.norm(x0)
            if value_fn(x0) == -np.inf:
                continue
        x, fx = _sphere_ascent(value_fn, grad_fn, x0, max_iter, tol)
        if fx > best_f:
            best_f, best_x = fx, x
    value = min(math.exp(best_f) if best_f > -np.inf else 0.0, 1.0)
    return BoundEstimate(value, 0.0, "optimizer", attaining_x=best_x)


def invariant_alpha_closed_form(k: int, d: int, s: float) -> BoundEstimate:
    """Kaczmarz bounds of the invariant law on G(k, d), in closed form.

    For W invariant and any unit x, ||P_W(x)||^2 is Beta(k/2, (d-k)/2), so

        s > 0:  alpha_s   = [ B(k/2, (d-k)/2 + s) / B(k/2, (d-k)/2) ]^(1/s)
        s = 0:  alpha_log = exp( digamma((d-k)/2) - digamma(d/2) ).
    """
    if not 1 <= k < d:
        raise InvalidParameterError(f"need 1 <= k < d, got k={k}, d={d}")
    if s < 0:
        raise InvalidParameterError(f"need s >= 0, got {s}")
    if s == 0:
        value = math.exp(digamma((d - k) / 2.0) - digamma(d / 2.0))
    else:
        log_moment = log_beta(k / 2.0, (d - k) / 2.0 + s) - log_beta(k / 2.0, (d - k) / 2.0)
        value = math.exp(log_moment / s)
    return BoundEstimate(min(max(value, 0.0), 1.0), s, "closed_form")


def _log_sphere_area(m: int) -> float:
    """log of the m-dimensional Hausdorff measure of the unit m-sphere."""
    return math.log(2.0) + 0.5 * (m + 1) * math.log(math.pi) - math.lgamma(0.5 * (m + 1))


def c_log_quadrature(k: int, d: int) -> float:
    """E[log(1 - ||P_W(x)||^2)] for W invariant on G(k, d), by quadrature.

    Reduces the sphere integral to the radial form

        [2 H_{k-1} H_{d-k-1} / H_{d-1}] * int_0^1 (1-r^2)^((k-2)/2) r^(d-k-1) log r dr

    with H_m the m-sphere area.  Independent of the digamma closed form:
    exp of the result must match invariant_alpha_closed_form(k, d, 0).
    """
    if not 1 <= k < d:
        raise InvalidParameterError(f"need 1 <= k < d, got k={k}, d={d}")
    const = math.exp(math.log(2.0) + _log_sphere_area(k - 1)
                     + _log_sphere_area(d - k - 1) - _log_sphere_area(d - 1))
    half_km2 = 0.5 * (k - 2)
    pow_r = d - k - 1

    def integrand(rho):
        return (1.0 - rho * rho) ** half_km2 * rho ** pow_r * np.log(rho)

    integral = quadrature_01(integrand, singular_at_zero=True,
                             singular_at_one=(k % 2 == 1))
    return const * integral


def _invariant_potential_mc(k: int, d: int, x: np.ndarray, s: float,
                            gen: np.random.Generator, n_samples: int):
    """Monte Carlo mean and stderr of the order-s (or log, s=0) kernel at x
    for the invariant law.  Subspaces are spans of Gaussian d x k matrices;
    ||P_W(x)||^2 is evaluated via the normal equations, batched."""
    x = np.asarray(x, dtype=float)
    chunk = max(1, 2_000_000 // (d * k))
    vals = np.empty(n_samples)
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        g = gen.standard_normal((m, d, k))
        v = np.einsum("mdk,d->mk", g, x)
        gram = np.einsum("mdi,mdj->mij", g, g)
        w = np.linalg.solve(gram, v[:, :, None])[:, :, 0]
        t = np.einsum("mk,mk->m", v, w)
        u = np.clip(1.0 - t, 1e-300, 1.0)
        vals[done:done + m] = np.log(u) if s == 0 else u ** s
        done += m
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(n_samples))
    return mean, se


def tightness_test(dist, s: float, probes: int, rng: SeededRng,
                   tol: float = 1e-9, mc_samples: int = 100000):
    """Certify probabilistic tightness: the potential is constant over the
    sphere iff the law minimizes the order-s (or logarithmic) bound.

    Evaluates the potential at `probes` random unit vectors plus all atom
    basis vectors and the extreme eigenvectors of the expected projection.
    Returns (tight, spread) where spread = max - min over the probe values.
    Discrete laws are evaluated exactly (tight iff spread <= tol); the
    invariant law is evaluated by Monte Carlo with mc_samples per probe
    (tight iff spread <= tol + 4 * pooled stderr).
    """
    if probes < 2:
        raise InvalidParameterError(f"need probes >= 2, got {probes}")
    if s < 0:
        raise InvalidParameterError(f"need s >= 0, got {s}")
    d = dist.ambient_dim
    gen = rng.generator
    points = []
    for _ in range(probes):
        g = gen.standard_normal(d)
        points.append(g / np.linalg.norm(g))
    if isinstance(dist, DiscreteDistribution):
        for atom in dist.atoms:
            for j in range(atom.dim):
                points.append(atom.basis[:, j].copy())
    _, evecs = sym_eig(dist.expected_projection())
    points.append(evecs[:, 0].copy())
    points.append(evecs[:, -1].copy())

    if isinstance(dist, DiscreteDistribution):
        if s == 0:
            values = np.array([dist.potential_log(x) for x in points])
        else:
            values = np.array([dist.potential_s(x, s) for x in points])
        finite = np.isfinite(values)
        if not finite.all():
            if not finite.any():
                return True, 0.0  # potential constant at -inf
            return False, float("inf")
        spread = float(values.max() - values.min())
        return spread <= tol, spread

    if isinstance(dist, InvariantDistribution):
        means, ses = [], []
        for x in points:
            mean, se = _invariant_potential_mc(dist.dim, d, x, s, gen, mc_samples)
            means.append(mean)
            ses.append(se)
        means = np.array(means)
        hi, lo = int(np.argmax(means)), int(np.argmin(means))
        spread = float(means[hi] - means[lo])
        pooled = math.sqrt(ses[hi] ** 2 + ses[lo] ** 2)
        return spread <= tol + 4.0 * pooled, spread

    raise UnsupportedVariantError(f"unknown distribution type {type(dist)!r}")


def inclusion_exclusion_bound(d: int, N: int) -> float:
    """P(some coordinate law atom unhit in N uniform draws over d atoms):

        sum_{k=1}^{d} (-1)^(k+1) C(d,k) (1 - k/d)^N.

    Computed in exact rational arithmetic (overflow-free) for moderate N;
    huge N falls back to a float sum whose terms decay too fast to cancel.
    """
    if d < 1 or N < 0:
        raise InvalidParameterError(f"need d >= 1 and N >= 0, got d={d}, N={N}")
    if N <= 10000:
        total = Fraction(0)
        for k in range(1, d + 1):
            term = Fraction(math.comb(d, k)) * Fraction(d - k, d) ** N
            total += term if k % 2 == 1 else -term
        return float(total)
    terms = []
    for k in range(1, d + 1):
        if d - k == 0:
            continue  # (1 - k/d)^N = 0 for N >= 1
        log_t = (math.lgamma(d + 1) - math.lgamma(k + 1) - math.lgamma(d - k + 1)
                 + N * math.log((d - k) / d))
        terms.append((1.0 if k % 2 == 1 else -1.0) * math.exp(log_t))
    return max(math.fsum(terms), 0.0)


def first_term_bound(d: int, N: int) -> float:
    """The k = 1 term alone: d (1 - 1/d)^N, an upper bound on the union term."""
    if d < 1 or N < 0:
        raise InvalidParameterError(f"need d >= 1 and N >= 0, got d={d}, N={N}")
    return d * (1.0 - 1.0 / d) ** N


def lyapunov_check(dist, s_list, restarts: int = 16, max_iter: int = 4000,
                   tol: float = 1e-8, seed: int = 0) -> bool:
    """Verify the moment-monotonicity alpha_{s2} <= alpha_{s1} + tol for all
    s2 <= s1 in the ascending list, with all optimizer runs sharing the same
    start set so suprema are compared at matched points."""
    s_list = list(s_list)
    if any(s <= 0 for s in s_list) or sorted(s_list) != s_list:
        raise InvalidParameterError("s_list must be ascending and positive")
    if isinstance(dist, InvariantDistribution):
        values = [invariant_alpha_closed_form(dist.dim, dist.ambient_dim, s).value
                  for s in s_list]
    else:
        values = [alpha_s_sup(dist, s, restarts=restarts, max_iter=max_iter,
                              rng=SeededRng(seed)).value
                  for s in s_list]
    return all(values[i] <= values[j] + tol
               for i in range(len(values)) for j in range(i + 1, len(values)))

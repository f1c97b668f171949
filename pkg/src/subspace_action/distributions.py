"""Probability laws on subspaces.

Two variants: a discrete weighted law over finitely many atoms, and the
rotation-invariant (Haar) law on G(k, d).  Discrete laws evaluate their
potentials exactly as finite sums; the invariant law has closed forms for
its expected projection and, in the bounds module, for its Kaczmarz bounds.
"""

import io

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidParameterError,
    MixedDimensionsError,
    NotUnitVectorError,
    UnsupportedVariantError,
)
from .linalg import SeededRng
from .subspaces import Subspace, sample_invariant

_PROB_TOL = 1e-12


def _check_unit(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if abs(float(x @ x) - 1.0) > 2e-10:
        raise NotUnitVectorError(f"||x|| = {np.linalg.norm(x):.12g}, expected 1")
    return x


class DiscreteDistribution:
    """Discrete law: atoms W_1..W_N with probabilities p_1..p_N.

    Duplicate atoms are allowed and never merged.  Atoms normally share a
    common dimension k; mixed-dimension laws are built via uniform_discrete
    and then carry dim = None.
    """

    variant = "discrete"

    def __init__(self, atoms, probs, require_common_dim: bool = True):
        atoms = tuple(atoms)
        if not atoms:
            raise InvalidParameterError("discrete law needs at least one atom")
        d = atoms[0].ambient_dim
        if any(a.ambient_dim != d for a in atoms):
            raise DimensionMismatchError("atoms must share the ambient dimension")
        dims = {a.dim for a in atoms}
        if require_common_dim and len(dims) > 1:
            raise MixedDimensionsError(
                f"atoms have mixed dimensions {sorted(dims)}; use uniform_discrete")
        probs = np.asarray(probs, dtype=float)
        if probs.shape != (len(atoms),) or np.any(probs < 0):
            raise InvalidParameterError("need one nonnegative probability per atom")
        if abs(probs.sum() - 1.0) > _PROB_TOL:
            raise InvalidParameterError(f"probabilities sum to {probs.sum():.17g}, not 1")
        self.atoms = atoms
        self.probs = probs.copy()
        self.ambient_dim = d
        self.dim = dims.pop() if len(dims) == 1 else None
        self._cum = np.cumsum(self.probs)
        # Stacked bases (N, d, k) enable vectorized potential evaluation.
        self._stacked = (np.stack([a.basis for a in atoms])
                         if self.dim is not None else None)

    def sample(self, rng: SeededRng | np.random.Generator) -> Subspace:
        """Inverse-CDF draw over the atoms."""
        gen = rng.generator if isinstance(rng, SeededRng) else rng
        return self.atoms[self.sample_index(gen)]

    def sample_index(self, gen: np.random.Generator) -> int:
        u = gen.random()
        return int(min(np.searchsorted(self._cum, u, side="right"), len(self.atoms) - 1))

    def expected_projection(self) -> np.ndarray:
        """sum_n p_n B_n B_n^T, exact."""
        ep = np.zeros((self.ambient_dim, self.ambient_dim))
        for a, p in zip(self.atoms, self.probs):
            ep += p * (a.basis @ a.basis.T)
        return ep

    def complement_masses(self, x: np.ndarray) -> np.ndarray:
        """Per-atom values 1 - ||P_{W_n}(x)||^2, clamped at 0 against round-off."""
        x = np.asarray(x, dtype=float)
        if self._stacked is not None:
            coeffs = np.einsum("ndk,d->nk", self._stacked, x)
            t = np.einsum("nk,nk->n", coeffs, coeffs)
        else:
            t = np.array([a.proj_norm_sq(x) for a in self.atoms])
        return np.maximum(1.0 - t, 0.0)

    def apply_weighted_projectors(self, x: np.ndarray, scale: np.ndarray) -> np.ndarray:
        """sum_n scale_n B_n B_n^T x (the workhorse of potential gradients)."""
        x = np.asarray(x, dtype=float)
        if self._stacked is not None:
            coeffs = np.einsum("ndk,d->nk", self._stacked, x)
            return np.einsum("ndk,nk->d", self._stacked, scale[:, None] * coeffs)
        out = np.zeros_like(x)
        for a, s in zip(self.atoms, scale):
            out += s * a.project(x)
        return out

    def potential_s(self, x: np.ndarray, s: float) -> float:
        """E[(1 - ||P_W(x)||^2)^s] = sum_n p_n (1 - ||P_{W_n}(x)||^2)^s for unit x."""
        if s <= 0:
            raise InvalidParameterError(f"potential_s needs s > 0, got {s}")
        x = _check_unit(x)
        return float(np.dot(self.probs, self.complement_masses(x) ** s))

    def potential_log(self, x: np.ndarray) -> float:
        """E[log(1 - ||P_W(x)||^2)]; -inf when an atom with p_n > 0 contains x."""
        x = _check_unit(x)
        u = self.complement_masses(x)
        hit = (u == 0.0) & (self.probs > 0)
        if np.any(hit):
            return float("-inf")
        keep = self.probs > 0
        return float(np.dot(self.probs[keep], np.log(u[keep])))

    def to_text(self) -> str:
        if self.dim is None:
            raise InvalidParameterError(
                "mixed-dimension laws have no file representation")
        out = io.StringIO()
        out.write(f"discrete {self.ambient_dim} {self.dim} {len(self.atoms)}\n")
        for a, p in zip(self.atoms, self.probs):
            out.write(f"{p:.17g}\n")
            out.write(a.to_text())
        return out.getvalue()

    def __repr__(self):
        return (f"DiscreteDistribution(d={self.ambient_dim}, k={self.dim}, "
                f"atoms={len(self.atoms)})")


class InvariantDistribution:
    """Rotation-invariant (Haar) law on G(k, d)."""

    variant = "invariant"

    def __init__(self, k: int, d: int):
        if not 1 <= k <= d:
            raise InvalidParameterError(f"need 1 <= k <= d, got k={k}, d={d}")
        self.dim = int(k)
        self.ambient_dim = int(d)

    def sample(self, rng: SeededRng | np.random.Generator) -> Subspace:
        return sample_invariant(rng, self.dim, self.ambient_dim)

    def expected_projection(self) -> np.ndarray:
        """(k/d) I: rotation invariance forces a multiple of the identity,
        and the trace of a rank-k projector fixes the multiple."""
        return (self.dim / self.ambient_dim) * np.eye(self.ambient_dim)

    def potential_s(self, x, s):
        raise UnsupportedVariantError(
            "invariant potentials are x-independent; use the closed forms in bounds")

    def potential_log(self, x):
        raise UnsupportedVariantError(
            "invariant potentials are x-independent; use the closed forms in bounds")

    def to_text(self) -> str:
        return f"invariant {self.ambient_dim} {self.dim}\n"

    def __repr__(self):
        return f"InvariantDistribution(k={self.dim}, d={self.ambient_dim})"


def from_fusion_frame(ff) -> DiscreteDistribution:
    """Law Pr[W = W_n] = v_n^2 / sum v_j^2 induced by a fusion frame."""
    w2 = ff.weights ** 2
    return DiscreteDistribution(ff.subspaces, w2 / w2.sum())


def uniform_discrete(subspaces, probs=None) -> DiscreteDistribution:
    """Discrete law without the common-dimension requirement."""
    subspaces = list(subspaces)
    if probs is None:
        probs = np.full(len(subspaces), 1.0 / len(subspaces))
    return DiscreteDistribution(subspaces, probs, require_common_dim=False)


def ronb(d: int) -> DiscreteDistribution:
    """Uniform law over the spans of the canonical basis vectors of R^d."""
    if d < 1:
        raise InvalidParameterError(f"need d >= 1, got {d}")
    eye = np.eye(d)
    atoms = [Subspace(eye[:, [n]], validate=False) for n in range(d)]
    return DiscreteDistribution(atoms, np.full(d, 1.0 / d))


def block_onb(d: int, k: int) -> DiscreteDistribution:
    """Uniform law over the d/k canonical coordinate blocks of dimension k."""
    if d < 1 or k < 1 or d % k != 0:
        raise InvalidParameterError(f"k must divide d, got d={d}, k={k}")
    eye = np.eye(d)
    n_blocks = d // k
    atoms = [Subspace(eye[:, i * k:(i + 1) * k], validate=False) for i in range(n_blocks)]
    return DiscreteDistribution(atoms, np.full(n_blocks, 1.0 / n_blocks))


def roots_of_unity(K: int) -> DiscreteDistribution:
    """Uniform law over the spans of the K-th roots-of-unity frame in R^2.

    Atoms need not be distinct as subspaces (e.g. K = 4 gives two lines,
    each appearing twice); the probabilistic semantics are unaffected.
    """
    if K < 3:
        raise InvalidParameterError(f"need K >= 3, got {K}")
    angles = 2.0 * np.pi * np.arange(1, K + 1) / K
    atoms = []
    for a in angles:
        v = np.array([[np.cos(a)], [np.sin(a)]])
        atoms.append(Subspace(v / np.linalg.norm(v), validate=False))
    return DiscreteDistribution(atoms, np.full(K, 1.0 / K))


def sample(dist, rng: SeededRng | np.random.Generator) -> Subspace:
    return dist.sample(rng)


def expected_projection(dist) -> np.ndarray:
    return dist.expected_projection()


def potential_s(dist, x, s: float) -> float:
    return dist.potential_s(x, s)


def potential_log(dist, x) -> float:
    return dist.potential_log(x)


def distribution_to_text(dist) -> str:
    return dist.to_text()


def distribution_from_text(text: str):
    """Parse either variant from its file representation."""
    tokens = iter(text.split())
    try:
        kind = next(tokens)
    except StopIteration:
        raise InvalidParameterError("empty distribution text") from None
    if kind == "invariant":
        d = int(next(tokens))
        k = int(next(tokens))
        return InvariantDistribution(k, d)
    if kind == "discrete":
        d = int(next(tokens))
        k = int(next(tokens))
        n = int(next(tokens))
        atoms, probs = [], []
        for _ in range(n):
            probs.append(float(next(tokens)))
            atom = Subspace._from_tokens(tokens)
            if atom.ambient_dim != d or atom.dim != k:
                raise InvalidParameterError("atom header disagrees with law header")
            atoms.append(atom)
        return DiscreteDistribution(atoms, probs)
    raise InvalidParameterError(f"unknown distribution kind {kind!r}")

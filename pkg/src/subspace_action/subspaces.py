"""k-dimensional subspaces of R^d: projections, the Frobenius metric on the
Grassmannian, and rotation-invariant (Haar) sampling."""

import io

import numpy as np

from .errors import DimensionMismatchError, InvalidParameterError
from .linalg import DEFAULT_TOL, SeededRng, gaussian_matrix, orthonormalize


class Subspace:
    """Immutable subspace of R^d carried by an orthonormal basis matrix.

    ``basis`` is d x k with orthonormal columns; the orthogonal projector
    is basis @ basis.T but is never formed densely unless asked for.
    Equality compares spans (bases are non-unique), via grassmann_distance.
    """

    __slots__ = ("ambient_dim", "dim", "basis")

    def __init__(self, basis: np.ndarray, validate: bool = True):
        basis = np.asarray(basis, dtype=float)
        if basis.ndim == 1:
            basis = basis[:, None]
        d, k = basis.shape
        if not 1 <= k <= d:
            raise InvalidParameterError(f"need 1 <= k <= d, got k={k}, d={d}")
        if validate:
            gram = basis.T @ basis
            if np.max(np.abs(gram - np.eye(k))) > 1e-10:
                raise InvalidParameterError("basis columns are not orthonormal")
        basis = basis.copy()
        basis.flags.writeable = False
        object.__setattr__(self, "ambient_dim", d)
        object.__setattr__(self, "dim", k)
        object.__setattr__(self, "basis", basis)

    def __setattr__(self, name, value):
        raise AttributeError("Subspace is immutable")

    def __getstate__(self):
        return self.ambient_dim, self.dim, np.asarray(self.basis)

    def __setstate__(self, state):
        d, k, basis = state
        basis = np.asarray(basis)
        basis.flags.writeable = False
        object.__setattr__(self, "ambient_dim", d)
        object.__setattr__(self, "dim", k)
        object.__setattr__(self, "basis", basis)

    def project(self, x: np.ndarray) -> np.ndarray:
        """Orthogonal projection of x onto this subspace."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.ambient_dim,):
            raise DimensionMismatchError(
                f"vector length {x.shape} != ambient dimension {self.ambient_dim}")
        return self.basis @ (self.basis.T @ x)

    def proj_norm_sq(self, x: np.ndarray) -> float:
        """Squared norm of the projection, computed as ||B^T x||^2."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.ambient_dim,):
            raise DimensionMismatchError(
                f"vector length {x.shape} != ambient dimension {self.ambient_dim}")
        coeffs = self.basis.T @ x
        return float(coeffs @ coeffs)

    def projector(self) -> np.ndarray:
        """Dense d x d projection matrix B B^T."""
        return self.basis @ self.basis.T

    def same_span(self, other: "Subspace", tol: float = 1e-8) -> bool:
        return grassmann_distance(self, other) <= tol

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        if other.ambient_dim != self.ambient_dim:
            return False
        return self.same_span(other)

    __hash__ = None

    def __repr__(self):
        return f"Subspace(d={self.ambient_dim}, k={self.dim})"

    def to_text(self) -> str:
        """Serialize: line "d k", then k rows of d basis entries."""
        out = io.StringIO()
        out.write(f"{self.ambient_dim} {self.dim}\n")
        for j in range(self.dim):
            out.write(" ".join(f"{v:.17g}" for v in self.basis[:, j]))
            out.write("\n")
        return out.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "Subspace":
        tokens = text.split()
        return cls._from_tokens(iter(tokens))

    @classmethod
    def _from_tokens(cls, tokens) -> "Subspace":
        d = int(next(tokens))
        k = int(next(tokens))
        basis = np.empty((d, k))
        for j in range(k):
            for i in range(d):
                basis[i, j] = float(next(tokens))
        return cls(basis)


def from_spanning(vectors, tol: float = DEFAULT_TOL) -> Subspace:
    """Subspace spanned by the given vectors (columns are orthonormalized)."""
    cols = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
    return Subspace(orthonormalize(cols, tol=tol), validate=False)


def project(w: Subspace, x: np.ndarray) -> np.ndarray:
    return w.project(x)


def proj_norm_sq(w: Subspace, x: np.ndarray) -> float:
    return w.proj_norm_sq(x)


def grassmann_distance(v: Subspace, w: Subspace) -> float:
    """Frobenius distance ||P_V - P_W||_F between the projectors.

    Formed from the explicit projector difference: the entrywise difference
    carries no cancellation, so equal spans come out at ~1e-15 rather than
    the ~1e-8 a cross-Gram shortcut would give.
    """
    if v.ambient_dim != w.ambient_dim:
        raise DimensionMismatchError(
            f"ambient dimensions differ: {v.ambient_dim} vs {w.ambient_dim}")
    diff = v.basis @ v.basis.T - w.basis @ w.basis.T
    return float(np.linalg.norm(diff))


def sample_invariant(rng: SeededRng | np.random.Generator, k: int, d: int) -> Subspace:
    """Draw from the rotation-invariant law on G(k, d): Gaussian matrix + QR."""
    if not 1 <= k <= d:
        raise InvalidParameterError(f"need 1 <= k <= d, got k={k}, d={d}")
    g = gaussian_matrix(rng, d, k)
    return Subspace(orthonormalize(g), validate=False)

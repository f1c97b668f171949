"""Fusion frames: weighted subspace systems, their operator and optimal
bounds, projection measurements, and the classical iterative reconstruction
driven by the frame operator."""

import io
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidParameterError, NotAFrameError
from .linalg import sym_eig
from .subspaces import Subspace

_FRAME_EIG_FLOOR = 1e-10


@dataclass(frozen=True)
class FrameBounds:
    """Optimal fusion frame bounds A <= B (extreme eigenvalues of S)."""
    A: float
    B: float


class FusionFrame:
    """Weighted collection {(W_n, v_n)} with a positive lower frame bound.

    Construction rejects systems whose frame operator has smallest
    eigenvalue <= 1e-10: everything downstream assumes A > 0.
    """

    __slots__ = ("subspaces", "weights", "ambient_dim", "_bounds")

    def __init__(self, subspaces, weights=None):
        subspaces = list(subspaces)
        if not subspaces:
            raise InvalidParameterError("fusion frame needs at least one subspace")
        d = subspaces[0].ambient_dim
        if any(w.ambient_dim != d for w in subspaces):
            raise DimensionMismatchError("subspaces must share the ambient dimension")
        if weights is None:
            weights = np.ones(len(subspaces))
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (len(subspaces),) or np.any(weights <= 0):
            raise InvalidParameterError("weights must be positive, one per subspace")
        object.__setattr__(self, "subspaces", tuple(subspaces))
        object.__setattr__(self, "weights", weights.copy())
        object.__setattr__(self, "ambient_dim", d)
        evals, _ = sym_eig(self._operator())
        if evals[0] <= _FRAME_EIG_FLOOR:
            raise NotAFrameError(
                f"smallest frame-operator eigenvalue {evals[0]:g} is not positive")
        object.__setattr__(self, "_bounds", FrameBounds(float(evals[0]), float(evals[-1])))

    def __setattr__(self, name, value):
        raise AttributeError("FusionFrame is immutable")

    def __getstate__(self):
        return self.subspaces, self.weights, self.ambient_dim, self._bounds

    def __setstate__(self, state):
        for name, value in zip(("subspaces", "weights", "ambient_dim", "_bounds"), state):
            object.__setattr__(self, name, value)

    def __len__(self):
        return len(self.subspaces)

    def _operator(self) -> np.ndarray:
        s = np.zeros((self.ambient_dim, self.ambient_dim))
        for w, v in zip(self.subspaces, self.weights):
            s += (v * v) * (w.basis @ w.basis.T)
        return s

    def to_text(self) -> str:
        """Serialize: line "d N", then per subspace "v k" plus its basis rows."""
        out = io.StringIO()
        out.write(f"{self.ambient_dim} {len(self.subspaces)}\n")
        for w, v in zip(self.subspaces, self.weights):
            out.write(f"{v:.17g} {w.dim}\n")
            for j in range(w.dim):
                out.write(" ".join(f"{x:.17g}" for x in w.basis[:, j]))
                out.write("\n")
        return out.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "FusionFrame":
        tokens = iter(text.split())
        d = int(next(tokens))
        n = int(next(tokens))
        subspaces, weights = [], []
        for _ in range(n):
            v = float(next(tokens))
            k = int(next(tokens))
            basis = np.empty((d, k))
            for j in range(k):
                for i in range(d):
                    basis[i, j] = float(next(tokens))
            subspaces.append(Subspace(basis))
            weights.append(v)
        return cls(subspaces, weights)


def frame_operator(ff: FusionFrame) -> np.ndarray:
    """S = sum_n v_n^2 B_n B_n^T (symmetric positive definite for a frame)."""
    return ff._operator()


def frame_bounds(ff: FusionFrame) -> FrameBounds:
    """Optimal bounds: A = lambda_min(S), B = lambda_max(S)."""
    if ff._bounds.A <= _FRAME_EIG_FLOOR:
        raise NotAFrameError("lower frame bound is not positive")
    return ff._bounds


def measure(ff: FusionFrame, x: np.ndarray) -> list[np.ndarray]:
    """Projection measurements y_n = P_{W_n}(x)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (ff.ambient_dim,):
        raise DimensionMismatchError(
            f"vector length {x.shape} != ambient dimension {ff.ambient_dim}")
    return [w.project(x) for w in ff.subspaces]


def classic_recover(ff: FusionFrame, y, x0: np.ndarray, n_iter: int,
                    x_true: np.ndarray | None = None):
    """Frame-operator iteration x_n = x_{n-1} + 2/(A+B) [sum v_j^2 y_j - S x_{n-1}].

    Converges geometrically with ratio (B-A)/(B+A).  When x_true is supplied
    (testing mode) the returned list holds the error norms ||x_true - x_n||
    for n = 0..n_iter; otherwise it is empty.

    Returns (estimate, errors).
    """
    bounds = frame_bounds(ff)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (ff.ambient_dim,):
        raise DimensionMismatchError("x0 has the wrong length")
    y = [np.asarray(v, dtype=float) for v in y]
    if len(y) != len(ff.subspaces) or any(v.shape != (ff.ambient_dim,) for v in y):
        raise DimensionMismatchError("one measurement of length d per subspace required")

    s = frame_operator(ff)
    rhs = np.zeros(ff.ambient_dim)
    for v, yn in zip(ff.weights, y):
        rhs += (v * v) * yn
    relax = 2.0 / (bounds.A + bounds.B)

    errors = []
    x = x0.copy()
    if x_true is not None:
        errors.append(float(np.linalg.norm(x_true - x)))
    for _ in range(n_iter):
        x = x + relax * (rhs - s @ x)
        if x_true is not None:
            errors.append(float(np.linalg.norm(x_true - x)))
    return x, errors

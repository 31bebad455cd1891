"""Dense-realizable linear operators, product-space points and spectral helpers.

Every operator offers a matrix-free ``apply``/``adjoint_apply`` pair and a
``dense()`` realization, so diagnostics can always fall back to an
eigendecomposition.

Classes
-------
LinearMap
    Abstract base class.
DenseMap, IdentityMap, ZeroMap, ScaledMap, AdjointMap, SumMap,
CompositionMap, BlockMap
    Concrete variants.
SymMetric
    A symmetric operator used as a metric, with a cached positivity bound.
PrimalDualPoint
    A pair ``(x, y)`` living in the product space.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from numbers import Real

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch, NonConvergenceWarning

__all__ = [
    "LinearMap",
    "DenseMap",
    "IdentityMap",
    "ZeroMap",
    "ScaledMap",
    "AdjointMap",
    "SumMap",
    "CompositionMap",
    "BlockMap",
    "SymMetric",
    "PrimalDualPoint",
    "as_vec",
    "as_map",
    "op_norm",
    "min_eig",
    "skew_map",
]


def as_vec(v, dim: int | None = None, name: str = "vector") -> np.ndarray:
    """Return ``v`` as a finite 1-D float array, checking its length."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be one-dimensional, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatch(f"{name} has length {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


class LinearMap:
    """Abstract linear operator ``R^cols -> R^rows``.

    Subclasses implement ``_apply``, ``_adjoint_apply`` and ``_dense``.
    The public methods check shapes.
    """

    shape: tuple[int, int]

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.shape[1],):
            raise DimensionMismatch(f"operator of shape {self.shape} cannot act on vector of shape {v.shape}")
        return self._apply(v)

    def adjoint_apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.shape[0],):
            raise DimensionMismatch(f"adjoint of operator of shape {self.shape} cannot act on vector of shape {v.shape}")
        return self._adjoint_apply(v)

    def dense(self) -> np.ndarray:
        """Dense realization as a ``(rows, cols)`` array."""
        return self._dense()

    @property
    def adjoint(self) -> LinearMap:
        return AdjointMap(self)

    @property
    def T(self) -> LinearMap:
        return self.adjoint

    def __matmul__(self, other):
        if isinstance(other, LinearMap):
            return CompositionMap(self, other)
        return self.apply(other)

    def __add__(self, other):
        if not isinstance(other, LinearMap):
            return NotImplemented
        return SumMap(self, other)

    def __sub__(self, other):
        if not isinstance(other, LinearMap):
            return NotImplemented
        return SumMap(self, ScaledMap(-1.0, other))

    def __neg__(self):
        return ScaledMap(-1.0, self)

    def __mul__(self, c):
        if not isinstance(c, Real):
            return NotImplemented
        return ScaledMap(float(c), self)

    __rmul__ = __mul__

    def __repr__(self):
        return f"{type(self).__name__}(shape={self.shape})"

    # default realizations, overridden where cheaper
    def _dense(self) -> np.ndarray:
        n = self.shape[1]
        out = np.empty(self.shape)
        e = np.zeros(n)
        for j in range(n):
            e[j] = 1.0
            out[:, j] = self._apply(e)
            e[j] = 0.0
        return out


class DenseMap(LinearMap):
    """Operator given by an explicit matrix."""

    def __init__(self, matrix):
        a = np.array(matrix, dtype=float, copy=True)
        if a.ndim != 2:
            raise DimensionMismatch(f"matrix must be two-dimensional, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("matrix contains non-finite entries")
        a.setflags(write=False)
        self.matrix = a
        self.shape = a.shape

    def _apply(self, v):
        return self.matrix @ v

    def _adjoint_apply(self, v):
        return self.matrix.T @ v

    def _dense(self):
        return self.matrix.copy()


class IdentityMap(LinearMap):
    def __init__(self, dim: int):
        self.shape = (int(dim), int(dim))

    def _apply(self, v):
        return v.copy()

    _adjoint_apply = _apply

    def _dense(self):
        return np.eye(self.shape[0])


class ZeroMap(LinearMap):
    def __init__(self, rows: int, cols: int | None = None):
        self.shape = (int(rows), int(rows if cols is None else cols))

    def _apply(self, v):
        return np.zeros(self.shape[0])

    def _adjoint_apply(self, v):
        return np.zeros(self.shape[1])

    def _dense(self):
        return np.zeros(self.shape)


class ScaledMap(LinearMap):
    """``c * T`` for a real scalar ``c``."""

    def __init__(self, c: float, base: LinearMap):
        self.c = float(c)
        self.base = base
        self.shape = base.shape

    def _apply(self, v):
        return self.c * self.base._apply(v)

    def _adjoint_apply(self, v):
        return self.c * self.base._adjoint_apply(v)

    def _dense(self):
        return self.c * self.base.dense()


class AdjointMap(LinearMap):
    def __init__(self, base: LinearMap):
        self.base = base
        self.shape = (base.shape[1], base.shape[0])

    def _apply(self, v):
        return self.base._adjoint_apply(v)

    def _adjoint_apply(self, v):
        return self.base._apply(v)

    def _dense(self):
        return self.base.dense().T.copy()

    @property
    def adjoint(self):
        return self.base


class SumMap(LinearMap):
    def __init__(self, *terms: LinearMap):
        if not terms:
            raise ValueError("SumMap needs at least one term")
        shape = terms[0].shape
        for t in terms[1:]:
            if t.shape != shape:
                raise DimensionMismatch(f"cannot add operators of shapes {shape} and {t.shape}")
        self.terms = tuple(terms)
        self.shape = shape

    def _apply(self, v):
        out = self.terms[0]._apply(v)
        for t in self.terms[1:]:
            out = out + t._apply(v)
        return out

    def _adjoint_apply(self, v):
        out = self.terms[0]._adjoint_apply(v)
        for t in self.terms[1:]:
            out = out + t._adjoint_apply(v)
        return out

    def _dense(self):
        return sum(t.dense() for t in self.terms)


class CompositionMap(LinearMap):
    """``outer @ inner``."""

    def __init__(self, outer: LinearMap, inner: LinearMap):
        if outer.shape[1] != inner.shape[0]:
            raise DimensionMismatch(f"cannot compose shapes {outer.shape} and {inner.shape}")
        self.outer = outer
        self.inner = inner
        self.shape = (outer.shape[0], inner.shape[1])

    def _apply(self, v):
        return self.outer._apply(self.inner._apply(v))

    def _adjoint_apply(self, v):
        return self.inner._adjoint_apply(self.outer._adjoint_apply(v))

    def _dense(self):
        return self.outer.dense() @ self.inner.dense()


class BlockMap(LinearMap):
    """2x2 block operator ``[[A11, A12], [A21, A22]]``.

    ``None`` entries are zero blocks; their shapes are inferred from the
    other entries in the same block row and column.
    """

    def __init__(self, a11, a12, a21, a22):
        blocks = [[a11, a12], [a21, a22]]
        rows = [None, None]
        cols = [None, None]
        for i in range(2):
            for j in range(2):
                b = blocks[i][j]
                if b is None:
                    continue
                for store, k, size in ((rows, i, b.shape[0]), (cols, j, b.shape[1])):
                    if store[k] is None:
                        store[k] = size
                    elif store[k] != size:
                        raise DimensionMismatch("inconsistent block shapes in BlockMap")
        if None in rows or None in cols:
            raise DimensionMismatch("each block row and column needs at least one explicit block")
        self.blocks = blocks
        self.rows = tuple(rows)
        self.cols = tuple(cols)
        self.shape = (rows[0] + rows[1], cols[0] + cols[1])

    def _apply(self, v):
        v1, v2 = v[: self.cols[0]], v[self.cols[0]:]
        out = np.zeros(self.shape[0])
        for i, sl in enumerate((slice(0, self.rows[0]), slice(self.rows[0], None))):
            for j, vj in enumerate((v1, v2)):
                b = self.blocks[i][j]
                if b is not None:
                    out[sl] += b._apply(vj)
        return out

    def _adjoint_apply(self, v):
        v1, v2 = v[: self.rows[0]], v[self.rows[0]:]
        out = np.zeros(self.shape[1])
        for j, sl in enumerate((slice(0, self.cols[0]), slice(self.cols[0], None))):
            for i, vi in enumerate((v1, v2)):
                b = self.blocks[i][j]
                if b is not None:
                    out[sl] += b._adjoint_apply(vi)
        return out

    def _dense(self):
        out = np.zeros(self.shape)
        r = (0, self.rows[0], self.shape[0])
        c = (0, self.cols[0], self.shape[1])
        for i in range(2):
            for j in range(2):
                b = self.blocks[i][j]
                if b is not None:
                    out[r[i]:r[i + 1], c[j]:c[j + 1]] = b.dense()
        return out


def as_map(op) -> LinearMap:
    """Wrap arrays as :class:`DenseMap`; pass operators through."""
    if isinstance(op, LinearMap):
        return op
    return DenseMap(op)


def skew_map(L: LinearMap) -> LinearMap:
    """The skew coupling ``(x, y) -> (L*y, -Lx)``."""
    m, n = L.shape
    return BlockMap(ZeroMap(n, n), L.adjoint, -L, ZeroMap(m, m))


def op_norm(T, tol: float = 1e-9, max_iter: int = 10_000, seed: int = 0, full_output: bool = False):
    """Spectral norm by power iteration on ``T*T``.

    Parameters
    ----------
    T : LinearMap or array_like
    tol : float
        Relative change of the estimate below which the iteration stops.
    max_iter : int
    seed : int
        Seed of the Gaussian start vector.
    full_output : bool
        If true, return ``(estimate, converged)``.

    Returns
    -------
    float or (float, bool)
        The estimate is ``||T v||`` for a unit vector ``v``, hence a lower
        bound on the true norm.  A :class:`NonConvergenceWarning` is
        emitted when the budget runs out.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    T = as_map(T)
    n = T.shape[1]
    if n == 0 or T.shape[0] == 0:
        return (0.0, True) if full_output else 0.0
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    est = 0.0
    converged = False
    for _ in range(max_iter):
        tv = T._apply(v)
        new = float(np.linalg.norm(tv))
        if new == 0.0:
            # v landed in the kernel, or ||Tv||^2 underflowed on a tiny operator
            dense = T.dense()
            if not np.any(dense) or np.abs(dense).max() < 1e-150:
                est, converged = float(np.linalg.norm(dense, 2)), True
                break
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            continue
        w = T._adjoint_apply(tv)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            est, converged = new, True
            break
        v = w / nw
        if abs(new - est) <= tol * new:
            est, converged = max(new, est), True
            break
        est = max(new, est)
    if not converged:
        warnings.warn(f"power iteration did not converge in {max_iter} iterations; best estimate {est:.6g}",
                      NonConvergenceWarning, stacklevel=2)
    return (est, converged) if full_output else est


def _dense_of(T) -> np.ndarray:
    if isinstance(T, SymMetric):
        return T.dense()
    if isinstance(T, LinearMap):
        return T.dense()
    return np.asarray(T, dtype=float)


def min_eig(T, sym_tol: float = 1e-12) -> float:
    """Smallest eigenvalue of a symmetric operator via ``eigh``.

    Raises
    ------
    ValueError
        If the dense realization is not symmetric to ``sym_tol`` relative.
    """
    a = _dense_of(T)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"min_eig needs a square operator, got shape {a.shape}")
    if a.size == 0:
        return np.inf
    scale = max(np.max(np.abs(a)), 1.0)
    if np.max(np.abs(a - a.T)) > sym_tol * scale:
        raise ValueError("operator is not symmetric")
    return float(sla.eigvalsh(0.5 * (a + a.T))[0])


class SymMetric:
    """A symmetric operator used as a (semi)metric ``<v, T v>``.

    Parameters
    ----------
    base : LinearMap or array_like
        Must be symmetric on its dense realization.
    """

    def __init__(self, base, sym_tol: float = 1e-12):
        self.base = as_map(base)
        a = self.base.dense()
        if a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"metric must be square, got shape {a.shape}")
        scale = max(np.max(np.abs(a)), 1.0) if a.size else 1.0
        if a.size and np.max(np.abs(a - a.T)) > sym_tol * scale:
            raise ValueError("metric operator is not symmetric")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        self._dense_cache = a
        self.shape = a.shape

    def dense(self) -> np.ndarray:
        return self._dense_cache.copy()

    def apply(self, v) -> np.ndarray:
        return self.base.apply(v)

    @cached_property
    def tau(self) -> float:
        """Strong positivity bound: the smallest eigenvalue (clipped at 0)."""
        return max(min_eig(self._dense_cache), 0.0)

    @cached_property
    def norm(self) -> float:
        return float(np.max(np.abs(sla.eigvalsh(self._dense_cache)))) if self.shape[0] else 0.0

    def inner(self, u, v) -> float:
        return float(np.dot(u, self.base.apply(v)))

    def sqnorm(self, v) -> float:
        return float(np.dot(v, self.base.apply(v)))

    def __repr__(self):
        return f"SymMetric(shape={self.shape})"


@dataclass(frozen=True)
class PrimalDualPoint:
    """A point ``(x, y)`` of the product space."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", as_vec(self.x, name="x"))
        object.__setattr__(self, "y", as_vec(self.y, name="y"))

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    @classmethod
    def from_flat(cls, z, n: int) -> PrimalDualPoint:
        z = np.asarray(z, dtype=float)
        return cls(z[:n], z[n:])

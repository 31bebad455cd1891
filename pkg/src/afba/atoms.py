"""Proximable functions, cocoercive maps and block-separable operators.

A :class:`ProxAtom` is a proper closed convex function with a closed-form
(or direct-solve) resolvent.  Conjugates are never coded directly; their
resolvents always go through the Moreau identity
``prox_{g f*}(v) = v - g prox_{f/g}(v/g)``.

Atom kinds and their string tags:

========  ===========================================
tag       function
========  ===========================================
zero      ``0``
l1        ``w * ||x||_1``
sq_l2     ``(mu/2) ||x||^2``
quad      ``x'Qx/2 + q'x`` with ``Q`` symmetric PSD
box       indicator of ``[lo, hi]``
point     indicator of ``{b}``
nonneg    indicator of the nonnegative orthant
l2        ``w * ||x||_2``
========  ===========================================
"""
from __future__ import annotations

import math
import threading

import numpy as np
import scipy.linalg as sla

from .errors import DimensionMismatch

__all__ = [
    "ProxAtom",
    "Zero",
    "L1",
    "SqL2",
    "Quadratic",
    "Box",
    "Point",
    "NonNeg",
    "L2Norm",
    "Conjugate",
    "BlockAtom",
    "CocoMap",
    "resolvent",
    "moreau_conjugate_prox",
    "evaluate",
    "coco_in_P_metric",
    "atom_from_dict",
    "FEAS_SLACK",
]

#: feasibility slack used when evaluating indicators
FEAS_SLACK = 1e-9


def _check_gamma(gamma):
    gamma = float(gamma)
    if not gamma > 0 or not math.isfinite(gamma):
        raise ValueError(f"step size must be positive and finite, got {gamma}")
    return gamma


def _param_vec(p, name):
    arr = np.array(p, dtype=float)
    if arr.ndim > 1:
        raise DimensionMismatch(f"{name} must be a scalar or a vector")
    if arr.ndim == 1:
        arr.setflags(write=False)
    return arr


class ProxAtom:
    """Base class.  ``dim`` is ``None`` for kinds that act elementwise on any length."""

    kind = "abstract"
    dim: int | None = None

    def value(self, v) -> float:
        raise NotImplementedError

    def resolvent(self, gamma, v) -> np.ndarray:
        gamma = _check_gamma(gamma)
        v = self._check(v)
        return self._prox(gamma, v)

    def conjugate_value(self, v) -> float:
        raise NotImplementedError

    # resolvent of ``Hii + df`` for a general symmetric positive definite ``Hii``
    has_metric_resolvent = False

    def metric_resolvent(self, Hii, r) -> np.ndarray:
        raise NotImplementedError(f"{self.kind} atom has no general-metric resolvent")

    def to_dict(self) -> dict:
        raise NotImplementedError

    def _check(self, v):
        v = np.asarray(v, dtype=float)
        if v.ndim != 1:
            raise DimensionMismatch("atoms act on one-dimensional vectors")
        if self.dim is not None and v.shape[0] != self.dim:
            raise DimensionMismatch(f"{self.kind} atom has dimension {self.dim}, got vector of length {v.shape[0]}")
        return v

    def __repr__(self):
        return f"{type(self).__name__}({self.to_dict()})"


class Zero(ProxAtom):
    kind = "zero"
    has_metric_resolvent = True

    def __init__(self, dim=None):
        self.dim = None if dim is None else int(dim)

    def value(self, v):
        self._check(v)
        return 0.0

    def _prox(self, gamma, v):
        return v.copy()

    def gradient(self, v):
        return np.zeros_like(np.asarray(v, dtype=float))

    def conjugate_value(self, v):
        v = self._check(v)
        return 0.0 if np.max(np.abs(v), initial=0.0) <= FEAS_SLACK else math.inf

    def metric_resolvent(self, Hii, r):
        return sla.solve(Hii, r, assume_a="pos")

    def to_dict(self):
        return {"kind": "zero"}


class L1(ProxAtom):
    kind = "l1"

    def __init__(self, weight=1.0):
        self.weight = float(weight)
        if self.weight < 0:
            raise ValueError("l1 weight must be nonnegative")

    def value(self, v):
        v = self._check(v)
        return self.weight * float(np.sum(np.abs(v)))

    def _prox(self, gamma, v):
        t = gamma * self.weight
        return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)

    def conjugate_value(self, v):
        v = self._check(v)
        return 0.0 if np.max(np.abs(v), initial=0.0) <= self.weight + FEAS_SLACK else math.inf

    def to_dict(self):
        return {"kind": "l1", "weight": self.weight}


class SqL2(ProxAtom):
    kind = "sq_l2"
    has_metric_resolvent = True

    def __init__(self, mu=1.0):
        self.mu = float(mu)
        if self.mu < 0:
            raise ValueError("sq_l2 modulus must be nonnegative")

    def value(self, v):
        v = self._check(v)
        return 0.5 * self.mu * float(np.dot(v, v))

    def _prox(self, gamma, v):
        return v / (1.0 + gamma * self.mu)

    def gradient(self, v):
        return self.mu * np.asarray(v, dtype=float)

    def conjugate_value(self, v):
        v = self._check(v)
        if self.mu == 0:
            return 0.0 if np.max(np.abs(v), initial=0.0) <= FEAS_SLACK else math.inf
        return float(np.dot(v, v)) / (2.0 * self.mu)

    def metric_resolvent(self, Hii, r):
        return sla.solve(Hii + self.mu * np.eye(Hii.shape[0]), r, assume_a="pos")

    def to_dict(self):
        return {"kind": "sq_l2", "mu": self.mu}


class Quadratic(ProxAtom):
    """``x'Qx/2 + q'x``.  Resolvents use a cached Cholesky factor of ``I + gQ``."""

    kind = "quad"
    has_metric_resolvent = True

    def __init__(self, Q, q=None):
        Q = np.array(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise DimensionMismatch(f"Q must be square, got shape {Q.shape}")
        if np.max(np.abs(Q - Q.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(Q), initial=0.0)):
            raise ValueError("Q must be symmetric")
        Q = 0.5 * (Q + Q.T)
        if Q.size and sla.eigvalsh(Q)[0] < -1e-10 * max(1.0, np.max(np.abs(Q))):
            raise ValueError("Q must be positive semidefinite")
        self.dim = Q.shape[0]
        q = np.zeros(self.dim) if q is None else np.array(q, dtype=float)
        if q.shape != (self.dim,):
            raise DimensionMismatch(f"q must have length {self.dim}")
        Q.setflags(write=False)
        q.setflags(write=False)
        self.Q, self.q = Q, q
        self._factors = {}
        self._lock = threading.Lock()

    def value(self, v):
        v = self._check(v)
        return 0.5 * float(v @ self.Q @ v) + float(self.q @ v)

    def gradient(self, v):
        return self.Q @ np.asarray(v, dtype=float) + self.q

    def factor(self, gamma):
        """Cholesky factor of ``I + gamma Q`` (cached per ``gamma``)."""
        with self._lock:
            f = self._factors.get(gamma)
            if f is None:
                if len(self._factors) > 8:
                    self._factors.clear()
                f = sla.cho_factor(np.eye(self.dim) + gamma * self.Q)
                self._factors[gamma] = f
            return f

    def _prox(self, gamma, v):
        return sla.cho_solve(self.factor(gamma), v - gamma * self.q)

    def conjugate_value(self, v):
        v = self._check(v)
        w = v - self.q
        x, *_ = np.linalg.lstsq(self.Q, w, rcond=None)
        if np.linalg.norm(self.Q @ x - w) > 1e-8 * max(1.0, np.linalg.norm(w)):
            return math.inf
        return 0.5 * float(w @ x)

    def metric_resolvent(self, Hii, r):
        return sla.solve(Hii + self.Q, r - self.q, assume_a="pos")

    def to_dict(self):
        return {"kind": "quad", "Q": self.Q.tolist(), "q": self.q.tolist()}


class Box(ProxAtom):
    kind = "box"

    def __init__(self, lo=0.0, hi=1.0):
        self.lo = _param_vec(lo, "lo")
        self.hi = _param_vec(hi, "hi")
        sizes = {a.shape[0] for a in (self.lo, self.hi) if a.ndim == 1}
        if len(sizes) > 1:
            raise DimensionMismatch("lo and hi have different lengths")
        self.dim = sizes.pop() if sizes else None
        if np.any(self.lo > self.hi):
            raise ValueError("box is empty: lo > hi")

    def value(self, v):
        v = self._check(v)
        ok = np.all(v >= self.lo - FEAS_SLACK) and np.all(v <= self.hi + FEAS_SLACK)
        return 0.0 if ok else math.inf

    def _prox(self, gamma, v):
        return np.clip(v, self.lo, self.hi)

    def conjugate_value(self, v):
        v = self._check(v)
        lo = np.broadcast_to(self.lo, v.shape)
        hi = np.broadcast_to(self.hi, v.shape)
        with np.errstate(invalid="ignore"):
            terms = np.where(v > 0, hi * v, np.where(v < 0, lo * v, 0.0))
        total = float(np.sum(terms))
        return math.inf if math.isnan(total) else total

    def to_dict(self):
        return {"kind": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


class Point(ProxAtom):
    kind = "point"

    def __init__(self, b):
        self.b = np.array(b, dtype=float)
        if self.b.ndim != 1:
            raise DimensionMismatch("point must be a vector")
        self.b.setflags(write=False)
        self.dim = self.b.shape[0]

    def value(self, v):
        v = self._check(v)
        return 0.0 if np.max(np.abs(v - self.b), initial=0.0) <= FEAS_SLACK else math.inf

    def _prox(self, gamma, v):
        return self.b.copy()

    def conjugate_value(self, v):
        v = self._check(v)
        return float(self.b @ v)

    def to_dict(self):
        return {"kind": "point", "b": self.b.tolist()}


class NonNeg(ProxAtom):
    kind = "nonneg"

    def __init__(self, dim=None):
        self.dim = None if dim is None else int(dim)

    def value(self, v):
        v = self._check(v)
        return 0.0 if np.all(v >= -FEAS_SLACK) else math.inf

    def _prox(self, gamma, v):
        return np.maximum(v, 0.0)

    def conjugate_value(self, v):
        v = self._check(v)
        return 0.0 if np.all(v <= FEAS_SLACK) else math.inf

    def to_dict(self):
        return {"kind": "nonneg"}


class L2Norm(ProxAtom):
    kind = "l2"

    def __init__(self, weight=1.0):
        self.weight = float(weight)
        if self.weight < 0:
            raise ValueError("l2 weight must be nonnegative")

    def value(self, v):
        v = self._check(v)
        return self.weight * float(np.linalg.norm(v))

    def _prox(self, gamma, v):
        nv = float(np.linalg.norm(v))
        t = gamma * self.weight
        if nv <= t:
            # includes v = 0, where 0 is in the subdifferential
            return np.zeros_like(v)
        return (1.0 - t / nv) * v

    def conjugate_value(self, v):
        v = self._check(v)
        return 0.0 if np.linalg.norm(v) <= self.weight + FEAS_SLACK else math.inf

    def to_dict(self):
        return {"kind": "l2", "weight": self.weight}


class Conjugate(ProxAtom):
    """The convex conjugate ``f*`` of an atom, resolved through Moreau."""

    def __init__(self, base: ProxAtom):
        if isinstance(base, Conjugate):
            raise ValueError("wrap the base atom directly instead of conjugating twice")
        self.base = base
        self.dim = base.dim
        self.kind = f"conj({base.kind})"

    def value(self, v):
        return self.base.conjugate_value(v)

    def conjugate_value(self, v):
        return self.base.value(v)

    def _prox(self, gamma, v):
        return v - gamma * self.base.resolvent(1.0 / gamma, v / gamma)

    def to_dict(self):
        return {"kind": "conjugate", "of": self.base.to_dict()}


def resolvent(a: ProxAtom, gamma, v) -> np.ndarray:
    """``argmin_z a(z) + ||v - z||^2 / (2 gamma)``."""
    return a.resolvent(gamma, v)


def moreau_conjugate_prox(a: ProxAtom, gamma, v) -> np.ndarray:
    """Resolvent of ``gamma * a*`` computed as ``v - gamma prox_{a/gamma}(v/gamma)``."""
    gamma = _check_gamma(gamma)
    v = np.asarray(v, dtype=float)
    return v - gamma * a.resolvent(1.0 / gamma, v / gamma)


def evaluate(a: ProxAtom, v) -> float:
    """Function value, ``inf`` outside the domain of indicator kinds."""
    return a.value(v)


_KINDS = {
    "zero": lambda d, dim: Zero(dim),
    "l1": lambda d, dim: L1(d.get("weight", 1.0)),
    "sq_l2": lambda d, dim: SqL2(d.get("mu", 1.0)),
    "quad": lambda d, dim: Quadratic(d["Q"], d.get("q")),
    "box": lambda d, dim: Box(d.get("lo", 0.0), d.get("hi", 1.0)),
    "point": lambda d, dim: Point(d["b"]),
    "nonneg": lambda d, dim: NonNeg(dim),
    "l2": lambda d, dim: L2Norm(d.get("weight", 1.0)),
}


def atom_from_dict(d: dict, dim: int | None = None) -> ProxAtom:
    """Build an atom from its tagged dictionary form (see :meth:`ProxAtom.to_dict`)."""
    kind = d.get("kind")
    if kind == "conjugate":
        return Conjugate(atom_from_dict(d["of"], dim))
    if kind not in _KINDS:
        raise ValueError(f"unknown atom kind {kind!r}")
    atom = _KINDS[kind](d, dim)
    if dim is not None and atom.dim is not None and atom.dim != dim:
        raise DimensionMismatch(f"{kind} atom has dimension {atom.dim}, expected {dim}")
    return atom


class BlockAtom:
    """Block-separable operator ``A = A_1 x ... x A_k``.

    Parameters
    ----------
    blocks : sequence of (ProxAtom, int)
        Each atom with the dimension of its block.
    """

    def __init__(self, blocks):
        blocks = [(a, int(d)) for a, d in blocks]
        for a, d in blocks:
            if d <= 0:
                raise DimensionMismatch("block dimensions must be positive")
            if a.dim is not None and a.dim != d:
                raise DimensionMismatch(f"{a.kind} atom of dimension {a.dim} placed in a block of size {d}")
        self.blocks = blocks
        self.sizes = tuple(d for _, d in blocks)
        self.dim = sum(self.sizes)
        bounds = np.cumsum((0,) + self.sizes)
        self.slices = tuple(slice(int(bounds[i]), int(bounds[i + 1])) for i in range(len(blocks)))

    @property
    def atoms(self):
        return [a for a, _ in self.blocks]

    def split(self, z):
        return [z[s] for s in self.slices]

    def value(self, z):
        return sum(a.value(z[s]) for (a, _), s in zip(self.blocks, self.slices))

    def resolvent(self, gammas, v):
        """Blockwise resolvent with one step size per block."""
        if np.ndim(gammas) == 0:
            gammas = [gammas] * len(self.blocks)
        return np.concatenate([a.resolvent(g, v[s]) for (a, _), s, g in zip(self.blocks, self.slices, gammas)])

    def __len__(self):
        return len(self.blocks)


class CocoMap:
    """Single-valued cocoercive map ``C`` with its canonical constant ``beta``.

    ``<Cz - Cz', z - z'> >= beta ||Cz - Cz'||^2``.  The zero map has
    ``beta = inf``.  All supported kinds are affine, ``C z = G z + c``
    with ``G`` symmetric PSD, which is recorded in ``G`` and ``c``.
    """

    def __init__(self, G, c=None, beta=None, kind="affine", params=None):
        G = np.array(G, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1]:
            raise DimensionMismatch("G must be square")
        G = 0.5 * (G + G.T)
        self.dim = G.shape[0]
        c = np.zeros(self.dim) if c is None else np.array(c, dtype=float)
        if c.shape != (self.dim,):
            raise DimensionMismatch(f"offset must have length {self.dim}")
        G.setflags(write=False)
        c.setflags(write=False)
        self.G, self.c = G, c
        if beta is None:
            top = float(sla.eigvalsh(G)[-1]) if self.dim else 0.0
            beta = math.inf if top <= 0 else 1.0 / top
        self.beta = float(beta)
        self.kind = kind
        self.params = params or {}

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (not np.any(self.G) and not np.any(self.c))

    @property
    def lipschitz(self) -> float:
        return 0.0 if math.isinf(self.beta) else 1.0 / self.beta

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        if z.shape != (self.dim,):
            raise DimensionMismatch(f"map acts on length {self.dim}, got {z.shape}")
        return self.G @ z + self.c

    def value(self, z) -> float:
        """Value of the potential ``z'Gz/2 + c'z + const`` whose gradient this is."""
        z = np.asarray(z, dtype=float)
        return 0.5 * float(z @ self.G @ z) + float(self.c @ z) + self.params.get("const", 0.0)

    @classmethod
    def zero(cls, dim):
        return cls(np.zeros((dim, dim)), beta=math.inf, kind="zero")

    @classmethod
    def affine_gradient(cls, A, b):
        """Gradient of ``||Az - b||^2 / 2``; ``beta = ||A||^-2``."""
        A = np.array(A, dtype=float)
        b = np.array(b, dtype=float)
        G = A.T @ A
        top = float(sla.eigvalsh(G)[-1]) if G.size else 0.0
        beta = math.inf if top <= 0 else 1.0 / top
        return cls(G, -A.T @ b, beta=beta, kind="lsq",
                   params={"A": A, "b": b, "const": 0.5 * float(b @ b)})

    @classmethod
    def scaled(cls, mu, dim):
        """``y -> y / mu``, the gradient of the conjugate of ``(mu/2)||.||^2``."""
        mu = float(mu)
        if not mu > 0:
            raise ValueError("mu must be positive")
        return cls(np.eye(dim) / mu, beta=mu, kind="scaled", params={"mu": mu})

    @classmethod
    def affine(cls, G, c=None):
        return cls(G, c, kind="affine")

    @classmethod
    def product(cls, maps):
        """Block-diagonal product; its constant is the smallest block constant."""
        G = sla.block_diag(*[m.G for m in maps])
        c = np.concatenate([m.c for m in maps])
        beta = min(m.beta for m in maps)
        const = sum(m.params.get("const", 0.0) for m in maps)
        return cls(G, c, beta=beta, kind="product", params={"const": const, "parts": list(maps)})

    def to_dict(self):
        if self.kind == "zero":
            return {"kind": "zero"}
        if self.kind == "lsq":
            return {"kind": "lsq", "A": self.params["A"].tolist(), "b": self.params["b"].tolist()}
        if self.kind == "scaled":
            return {"kind": "sq_l2", "mu": self.params["mu"]}
        return {"kind": "affine", "G": self.G.tolist(), "c": self.c.tolist()}

    def __repr__(self):
        return f"CocoMap(kind={self.kind!r}, dim={self.dim}, beta={self.beta:.6g})"


def coco_in_P_metric(c: CocoMap, tau: float) -> float:
    """Cocoercivity constant of ``c`` in the metric of any ``P >= tau Id``."""
    tau = float(tau)
    if not tau > 0:
        raise ValueError("tau must be positive")
    if c.is_zero:
        return math.inf
    return c.beta * tau

"""The result object returned by every solver."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = ["SolveReport", "TRACE_HEADER", "STATUSES"]

TRACE_HEADER = ("n", "lambda", "alpha", "res_P", "res_D", "fejer", "objective")

#: termination causes
STATUSES = ("converged", "max_iter", "stationary", "numeric_failure")


@dataclass
class SolveReport:
    """Iteration history and outcome of a solve.

    Per-step series (``lam``, ``alpha``, ``res_P``, ``res_D``) have one
    entry per performed iteration ``n = 0 .. iterations-1``; entry ``n``
    describes the step from ``z_n`` to ``z_{n+1}``.  Point series
    (``fejer``, ``objective``) have ``iterations + 1`` entries, one per
    iterate ``z_0 .. z_N``.

    Attributes
    ----------
    status : str
        One of ``converged``, ``max_iter``, ``stationary``, ``numeric_failure``.
    z : ndarray
        Final iterate.
    split : int or None
        Length of the primal block when ``z = (x, y)``.
    iterates : ndarray or None
        ``(iterations + 1, dim)`` array when recording was requested.
    """

    status: str
    z: np.ndarray
    iterations: int
    lam: np.ndarray
    alpha: np.ndarray
    res_P: np.ndarray
    res_D: np.ndarray
    fejer: np.ndarray | None = None
    objective: np.ndarray | None = None
    iterates: np.ndarray | None = None
    split: int | None = None
    diagnostics: dict[str, Any] = field(default_factory=dict)
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        n = self.iterations
        for name in ("lam", "alpha", "res_P", "res_D"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != (n,):
                raise ValueError(f"{name} has {arr.shape[0]} entries for {n} iterations")
            setattr(self, name, arr)
        for name in ("fejer", "objective"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=float)
                if arr.shape != (n + 1,):
                    raise ValueError(f"{name} has {arr.shape[0]} entries for {n} iterations")
                setattr(self, name, arr)
        if self.iterates is not None and self.iterates.shape[0] != n + 1:
            raise ValueError("iterate history length does not match iteration count")

    @property
    def converged(self) -> bool:
        return self.status in ("converged", "stationary")

    @property
    def x(self) -> np.ndarray:
        return self.z if self.split is None else self.z[: self.split]

    @property
    def y(self) -> np.ndarray | None:
        return None if self.split is None else self.z[self.split:]

    def rows(self, every_k: int = 1):
        """Trace rows ``(n, lambda, alpha, res_P, res_D, fejer, objective)``.

        Missing quantities are ``None``.  With thinning, row 0 and the last
        row are always kept.
        """
        N = self.iterations
        every_k = max(int(every_k), 1)
        for n in range(N):
            if n % every_k and n != N - 1:
                continue
            yield (
                n,
                float(self.lam[n]),
                float(self.alpha[n]),
                float(self.res_P[n]),
                float(self.res_D[n]),
                None if self.fejer is None else float(self.fejer[n]),
                None if self.objective is None else float(self.objective[n]),
            )

    def summary(self) -> dict:
        last = lambda a: None if a is None or len(a) == 0 else _num(a[-1])  # noqa: E731
        return {
            "status": self.status,
            "iterations": self.iterations,
            "final_res_P": last(self.res_P),
            "final_res_D": last(self.res_D),
            "final_fejer": last(self.fejer),
            "final_objective": last(self.objective),
        }

    def to_dict(self, include_solution: bool = True) -> dict:
        out = self.summary()
        if include_solution:
            out["solution"] = {"x": self.x.tolist()}
            if self.split is not None:
                out["solution"]["y"] = self.y.tolist()
        out["diagnostics"] = self.diagnostics
        out["meta"] = self.meta
        return out


def _num(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x

"""Symmetric tridiagonal storage, LDL^T factorization and solves.

Every implicit step in this package reduces to a symmetric positive definite
tridiagonal system, so only the band is stored and no pivoting is done.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class NotSPDError(np.linalg.LinAlgError):
    """Raised when a nonpositive pivot shows up during LDL^T factorization."""

    def __init__(self, index: int, pivot: float):
        super().__init__(f"matrix is not SPD: pivot {index} = {pivot!r}")
        self.index = index
        self.pivot = pivot


@dataclass(frozen=True)
class SymTridiag:
    """Symmetric tridiagonal matrix held as its diagonal and superdiagonal."""

    diag: np.ndarray
    off: np.ndarray

    def __post_init__(self):
        diag = np.asarray(self.diag, dtype=float).copy()
        off = np.asarray(self.off, dtype=float).copy()
        if diag.ndim != 1 or off.ndim != 1:
            raise ValueError("diag and off must be 1-D")
        if diag.size == 0 or off.size != diag.size - 1:
            raise ValueError(
                f"off has length {off.size}, expected {max(diag.size - 1, 0)}"
            )
        diag.flags.writeable = False
        off.flags.writeable = False
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "off", off)

    @property
    def n(self) -> int:
        return self.diag.size

    @classmethod
    def identity(cls, n: int) -> SymTridiag:
        return cls(np.ones(n), np.zeros(n - 1))

    @classmethod
    def from_dense(cls, A) -> SymTridiag:
        A = np.asarray(A, dtype=float)
        return cls(np.diag(A).copy(), np.diag(A, 1).copy())

    def todense(self) -> np.ndarray:
        A = np.diag(self.diag)
        if self.n > 1:
            A += np.diag(self.off, 1) + np.diag(self.off, -1)
        return A

    def __add__(self, other: SymTridiag) -> SymTridiag:
        if other.n != self.n:
            raise ValueError("dimension mismatch")
        return SymTridiag(self.diag + other.diag, self.off + other.off)

    def scaled(self, c: float) -> SymTridiag:
        return SymTridiag(c * self.diag, c * self.off)

    def restricted(self, start: int) -> SymTridiag:
        """Trailing principal submatrix with rows/cols ``start..n-1``."""
        return SymTridiag(self.diag[start:], self.off[start:])

    def with_diag_update(self, index: int, delta: float) -> SymTridiag:
        diag = self.diag.copy()
        diag[index] += delta
        return SymTridiag(diag, self.off)

    def matvec(self, x) -> np.ndarray:
        return matvec(self, x)

    def factor(self) -> LDLT:
        return LDLT.factor(self)

    def solve(self, b) -> np.ndarray:
        return factor_solve(self, b)


class LDLT:
    """Unit lower bidiagonal L and diagonal D with A = L D L^T."""

    def __init__(self, d: np.ndarray, l: np.ndarray):
        self.d = d
        self.l = l

    @classmethod
    def factor(cls, A: SymTridiag) -> LDLT:
        n = A.n
        a = A.diag.tolist()
        e = A.off.tolist()
        d = [0.0] * n
        l = [0.0] * (n - 1)
        d[0] = a[0]
        if not d[0] > 0.0:
            raise NotSPDError(0, d[0])
        for i in range(1, n):
            l[i - 1] = e[i - 1] / d[i - 1]
            d[i] = a[i] - l[i - 1] * e[i - 1]
            if not d[i] > 0.0:
                raise NotSPDError(i, d[i])
        return cls(np.array(d), np.array(l))

    @property
    def n(self) -> int:
        return self.d.size

    def solve(self, b) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if b.shape != (self.n,):
            raise ValueError(f"rhs has shape {b.shape}, expected ({self.n},)")
        d = self.d.tolist()
        l = self.l.tolist()
        y = b.tolist()
        n = len(d)
        for i in range(1, n):
            y[i] -= l[i - 1] * y[i - 1]
        for i in range(n):
            y[i] /= d[i]
        for i in range(n - 2, -1, -1):
            y[i] -= l[i] * y[i + 1]
        return np.array(y)


def matvec(A: SymTridiag, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (A.n,):
        raise ValueError(f"vector has shape {x.shape}, expected ({A.n},)")
    y = A.diag * x
    y[:-1] += A.off * x[1:]
    y[1:] += A.off * x[:-1]
    return y


def factor_solve(A: SymTridiag, b) -> np.ndarray:
    """Solve ``A x = b`` for SPD tridiagonal ``A``; raises NotSPDError otherwise."""
    b = np.asarray(b, dtype=float)
    if b.shape != (A.n,):
        raise ValueError(f"rhs has shape {b.shape}, expected ({A.n},)")
    return LDLT.factor(A).solve(b)

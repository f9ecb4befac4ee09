"""Truncated realization of the defining representation on
l2(N) (x) l2(Z) (x) l2(Z) as sparse operators.

On the standard basis e_{i,j,k} (i >= 0 on the N leg, j and k signed on
the Z legs) the generators act by

    pi(a)  e_{i,j,k} = sqrt(1 - |q|^{2i+2}) e_{i+1,j,k}
    pi(b)  e_{i,j,k} = q^i                  e_{i,j+1,k}
    pi(D)  e_{i,j,k} = e^{-2*pi*i*theta*j}  e_{i,j,k+1}

Truncation is by row dropping (compression to the finite grid), which
breaks the relations only within a few steps of the cuts; every
assertion therefore quantifies over interior basis vectors, i.e. those
at least interior_margin away from each cut.  The i = 0 edge is a
genuine boundary of the N leg, not a cut, and stays exact.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .hopf import AlgebraElement, BasisMonomial, QParam


class GridError(ValueError):
    """Invalid truncation geometry or an object leaving the grid."""


# ---------------------------------------------------------------------------
# truncation geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TruncGrid:
    """Index box i in [0, n_cut), j, k in [-z_cut, z_cut]."""

    n_cut: int
    z_cut: int
    interior_margin: int = 0

    def __post_init__(self):
        if self.n_cut < 1 or self.z_cut < 1:
            raise GridError("n_cut and z_cut must be positive")
        if not (0 <= self.interior_margin < min(self.n_cut, self.z_cut)):
            raise GridError("interior_margin must satisfy "
                            "0 <= margin < min(n_cut, z_cut)")

    @property
    def width(self) -> int:
        return 2 * self.z_cut + 1

    @property
    def dim(self) -> int:
        return self.n_cut * self.width * self.width

    def index(self, i: int, j: int, k: int) -> int:
        return (i * self.width + (j + self.z_cut)) * self.width + (k + self.z_cut)

    def triple(self, flat: int) -> tuple[int, int, int]:
        w = self.width
        k = flat % w
        j = (flat // w) % w
        i = flat // (w * w)
        return (i, j - self.z_cut, k - self.z_cut)

    def in_grid(self, i: int, j: int, k: int) -> bool:
        return (0 <= i < self.n_cut and abs(j) <= self.z_cut
                and abs(k) <= self.z_cut)

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Flat arrays (I, J, K) of the triple indices in flat order."""
        w = self.width
        rng = np.arange(self.dim)
        k = rng % w - self.z_cut
        j = (rng // w) % w - self.z_cut
        i = rng // (w * w)
        return i, j, k

    def interior_mask(self, margin: int | None = None) -> np.ndarray:
        """Basis vectors at least `margin` away from every truncation
        cut (the ends of the Z legs and the top of the N leg)."""
        m = self.interior_margin if margin is None else margin
        i, j, k = self.coords
        return ((i < self.n_cut - m) & (np.abs(j) <= self.z_cut - m)
                & (np.abs(k) <= self.z_cut - m))

    def interior_triples(self, margin: int | None = None) -> list[tuple[int, int, int]]:
        mask = self.interior_mask(margin)
        return [self.triple(int(f)) for f in np.nonzero(mask)[0]]


# ---------------------------------------------------------------------------
# sparse operators
# ---------------------------------------------------------------------------

class SparseOperator:
    """Coordinate-style sparse operator bound to a truncation grid.

    Backed by a scipy CSR matrix over the flat index; the grid carries
    the triple/flat translation.  Instances are treated as immutable.
    """

    __slots__ = ("grid", "mat")

    def __init__(self, grid: TruncGrid, mat):
        self.grid = grid
        self.mat = sp.csr_matrix(mat)

    # -- constructors --
    @classmethod
    def from_entries(cls, grid, entries) -> "SparseOperator":
        """entries: iterable of ((i,j,k),(i',j',k'), value) meaning
        <e_{i',j',k'}| T |e_{i,j,k}> = value (column is the first triple)."""
        rows, cols, data = [], [], []
        for src, dst, val in entries:
            if not grid.in_grid(*src) or not grid.in_grid(*dst):
                raise GridError(f"entry {src}->{dst} leaves the grid")
            cols.append(grid.index(*src))
            rows.append(grid.index(*dst))
            data.append(val)
        mat = sp.coo_matrix((data, (rows, cols)), shape=(grid.dim, grid.dim),
                            dtype=complex)
        mat.sum_duplicates()
        return cls(grid, mat.tocsr())

    @classmethod
    def shift(cls, grid, dijk, weights) -> "SparseOperator":
        """Weighted coordinate shift e_v -> weights[v] * e_{v+dijk},
        rows leaving the grid dropped."""
        di, dj, dk = dijk
        i, j, k = grid.coords
        ti, tj, tk = i + di, j + dj, k + dk
        ok = ((ti >= 0) & (ti < grid.n_cut) & (np.abs(tj) <= grid.z_cut)
              & (np.abs(tk) <= grid.z_cut))
        w = np.asarray(weights, dtype=complex)
        ok &= w != 0
        cols = np.nonzero(ok)[0]
        rows = ((ti[ok] * grid.width + (tj[ok] + grid.z_cut)) * grid.width
                + (tk[ok] + grid.z_cut))
        mat = sp.coo_matrix((w[ok], (rows, cols)), shape=(grid.dim, grid.dim))
        return cls(grid, mat.tocsr())

    @classmethod
    def diagonal(cls, grid, diag) -> "SparseOperator":
        return cls(grid, sp.diags(np.asarray(diag, dtype=complex), format="csr",
                                  shape=(grid.dim, grid.dim)))

    @classmethod
    def identity(cls, grid) -> "SparseOperator":
        return cls(grid, sp.identity(grid.dim, dtype=complex, format="csr"))

    # -- algebra --
    def __matmul__(self, other: "SparseOperator") -> "SparseOperator":
        self._check(other)
        return SparseOperator(self.grid, self.mat @ other.mat)

    def __add__(self, other: "SparseOperator") -> "SparseOperator":
        self._check(other)
        return SparseOperator(self.grid, self.mat + other.mat)

    def __sub__(self, other: "SparseOperator") -> "SparseOperator":
        self._check(other)
        return SparseOperator(self.grid, self.mat - other.mat)

    def __mul__(self, scalar) -> "SparseOperator":
        return SparseOperator(self.grid, self.mat * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "SparseOperator":
        return self * (-1.0)

    @property
    def H(self) -> "SparseOperator":
        return SparseOperator(self.grid, self.mat.conj().T.tocsr())

    def _check(self, other: "SparseOperator"):
        if self.grid != other.grid:
            raise GridError("operators live on different grids")

    # -- queries --
    @property
    def nnz(self) -> int:
        return self.mat.nnz

    def entry(self, src, dst) -> complex:
        """<e_dst | T | e_src>."""
        return complex(self.mat[self.grid.index(*dst), self.grid.index(*src)])

    def restrict_cols(self, mask: np.ndarray):
        return self.mat[:, np.nonzero(mask)[0]]

    def max_abs(self, col_mask: np.ndarray | None = None,
                row_mask: np.ndarray | None = None) -> float:
        """Largest entry magnitude, optionally restricted.  For the
        weighted single-shift operators used throughout this module the
        column map is injective, so this equals the operator norm."""
        m = self.mat
        if col_mask is not None:
            m = m[:, np.nonzero(col_mask)[0]]
        if row_mask is not None:
            m = m[np.nonzero(row_mask)[0], :]
        if m.nnz == 0:
            return 0.0
        return float(np.max(np.abs(m.data)))

    def norm_bound(self, col_mask: np.ndarray | None = None) -> float:
        """Upper bound sqrt(norm_1 * norm_inf) on the operator norm."""
        m = self.mat if col_mask is None else self.mat[:, np.nonzero(col_mask)[0]]
        if m.nnz == 0:
            return 0.0
        a = np.abs(m)
        n1 = a.sum(axis=0).max()
        ninf = a.sum(axis=1).max()
        return float(math.sqrt(n1 * ninf))

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.mat @ vec

    def entries(self):
        """Iterate ((i,j,k),(i',j',k'), value) with column triple first."""
        coo = self.mat.tocoo()
        for r, c, v in zip(coo.row, coo.col, coo.data):
            yield self.grid.triple(int(c)), self.grid.triple(int(r)), complex(v)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

@dataclass
class GeneratorSet:
    """The represented generators on a truncation grid, with closed-form
    power matrices and multiplicative extension to monomials."""

    qp: QParam
    grid: TruncGrid
    op_a: SparseOperator
    op_b: SparseOperator
    op_D: SparseOperator
    _cache: dict = field(default_factory=dict, repr=False)

    def op(self, tag: str) -> SparseOperator:
        if tag == "a":
            return self.op_a
        if tag == "b":
            return self.op_b
        if tag == "D":
            return self.op_D
        if tag in ("a*", "b*", "D*"):
            return self.op(tag[0]).H
        raise ValueError(f"unknown generator {tag!r}")

    # closed-form weights of generator powers on a basis vector ---------

    def _a_power_weights(self, p: int) -> np.ndarray:
        """Weight of a^p (p>0) or (a*)^{-p} (p<0) at each source vector;
        (a*)^r annihilates e_i for i < r."""
        i, _, _ = self.grid.coords
        r2 = self.qp.modulus ** 2
        w = np.ones(self.grid.dim)
        if p >= 0:
            for c in range(1, p + 1):
                w = w * np.sqrt(1.0 - r2 ** (i + c))
        else:
            for c in range(0, -p):
                w = w * np.sqrt(np.maximum(1.0 - r2 ** np.maximum(i - c, 0), 0.0))
            w = np.where(i + p >= 0, w, 0.0)
        return w

    def power(self, tag: str, p: int) -> SparseOperator:
        """pi(g)^p as a single weighted shift (p >= 0)."""
        if p < 0:
            raise ValueError("power expects p >= 0; use the adjoint tag")
        key = (tag, p)
        if key in self._cache:
            return self._cache[key]
        grid, qp = self.grid, self.qp
        i, j, _ = grid.coords
        if tag == "a":
            out = SparseOperator.shift(grid, (p, 0, 0), self._a_power_weights(p))
        elif tag == "a*":
            out = SparseOperator.shift(grid, (-p, 0, 0), self._a_power_weights(-p))
        elif tag == "b":
            out = SparseOperator.shift(
                grid, (0, p, 0),
                qp.modulus ** (i * p) * np.exp(1j * math.pi * qp.theta * i * p))
        elif tag == "b*":
            out = SparseOperator.shift(
                grid, (0, -p, 0),
                qp.modulus ** (i * p) * np.exp(-1j * math.pi * qp.theta * i * p))
        elif tag == "D":
            out = SparseOperator.shift(
                grid, (0, 0, p), np.exp(-2j * math.pi * qp.theta * j * p))
        elif tag == "D*":
            out = SparseOperator.shift(
                grid, (0, 0, -p), np.exp(2j * math.pi * qp.theta * j * p))
        else:
            raise ValueError(f"unknown generator {tag!r}")
        self._cache[key] = out
        return out

    def monomial_operator(self, mono) -> SparseOperator:
        """pi extended multiplicatively: the matrix of <n,m,k,l>."""
        n, m, k, l = BasisMonomial(*mono)
        out = self.power("a", n) if n >= 0 else self.power("a*", -n)
        if m:
            out = out @ self.power("b", m)
        if k:
            out = out @ self.power("b*", k)
        if l:
            out = out @ (self.power("D", l) if l > 0 else self.power("D*", -l))
        return out

    def element_operator(self, elem: AlgebraElement) -> SparseOperator:
        out = SparseOperator(self.grid,
                             sp.csr_matrix((self.grid.dim, self.grid.dim),
                                           dtype=complex))
        for mono, c in elem.terms.items():
            out = out + c * self.monomial_operator(mono)
        return out

    # sparse-vector action (exact, used by the state probes) ------------

    def apply_monomial(self, mono, vec: dict) -> dict:
        """Apply pi(<n,m,k,l>) to a sparse vector {(i,j,k): amp},
        dropping components that leave the grid."""
        n, m, k, l = BasisMonomial(*mono)
        qp, grid = self.qp, self.grid
        r2 = qp.modulus ** 2
        out = {}
        for (i, j, kk), amp in vec.items():
            # rightmost factor first: D^l, then b*^k, b^m, then a-part
            w = amp
            if l:
                w *= cmath.exp(-2j * math.pi * qp.theta * j * l)
            j2 = j - k + m
            if k:
                w *= qp.qbarpow(i * k)
            if m:
                w *= qp.qpow(i * m)
            if n >= 0:
                i2 = i + n
                for c in range(1, n + 1):
                    w *= math.sqrt(1.0 - r2 ** (i + c))
            else:
                i2 = i + n
                if i2 < 0:
                    continue
                for c in range(0, -n):
                    w *= math.sqrt(1.0 - r2 ** (i - c))
            k2 = kk + l
            # intermediate b*^k excursion must also stay on the grid
            if abs(j - k) > grid.z_cut:
                continue
            if not grid.in_grid(i2, j2, k2) or w == 0:
                continue
            out[(i2, j2, k2)] = out.get((i2, j2, k2), 0j) + w
        return out

    def apply_element(self, elem: AlgebraElement, vec: dict) -> dict:
        out = {}
        for mono, c in elem.terms.items():
            for pos, amp in self.apply_monomial(mono, vec).items():
                out[pos] = out.get(pos, 0j) + c * amp
        return out


def build_generators(qp: QParam, grid: TruncGrid) -> GeneratorSet:
    """Materialize pi(a), pi(b), pi(D) on the grid."""
    i, j, _ = grid.coords
    r2 = qp.modulus ** 2
    op_a = SparseOperator.shift(grid, (1, 0, 0), np.sqrt(1.0 - r2 ** (i + 1)))
    op_b = SparseOperator.shift(
        grid, (0, 1, 0), qp.modulus ** i * np.exp(1j * math.pi * qp.theta * i))
    op_D = SparseOperator.shift(grid, (0, 0, 1),
                                np.exp(-2j * math.pi * qp.theta * j))
    return GeneratorSet(qp=qp, grid=grid, op_a=op_a, op_b=op_b, op_D=op_D)


# ---------------------------------------------------------------------------
# relation and covariance checks
# ---------------------------------------------------------------------------

RELATION_NAMES = (
    "ba=q*ab",
    "a*b=q*ba*",
    "bb*=b*b",
    "aa*+bb*=1",
    "aD=Da",
    "bD=w*Db",
    "DD*=D*D=1",
    "a*a+|q|^2*b*b=1",
)


def relation_residuals(gens: GeneratorSet,
                       margin: int | None = None) -> dict[str, float]:
    """Operator norm of each defining-relation residual on interior
    basis vectors.  Every residual here is a weighted single shift or a
    diagonal, so the max entry magnitude is the exact operator norm.
    """
    a, b, D = gens.op_a, gens.op_b, gens.op_D
    A, B, Ds = a.H, b.H, D.H
    one = SparseOperator.identity(gens.grid)
    q = gens.qp.qpow(1)
    w = gens.qp.unit_phase(1)
    r2 = gens.qp.modulus ** 2
    mask = gens.grid.interior_mask(margin)
    residuals = {
        RELATION_NAMES[0]: b @ a - q * (a @ b),
        RELATION_NAMES[1]: A @ b - q * (b @ A),
        RELATION_NAMES[2]: b @ B - B @ b,
        RELATION_NAMES[3]: a @ A + b @ B - one,
        RELATION_NAMES[4]: a @ D - D @ a,
        RELATION_NAMES[5]: b @ D - w * (D @ b),
        RELATION_NAMES[7]: A @ a + r2 * (B @ b) - one,
    }
    out = {name: res.max_abs(col_mask=mask) for name, res in residuals.items()}
    out[RELATION_NAMES[6]] = max((D @ Ds - one).max_abs(col_mask=mask),
                                 (Ds @ D - one).max_abs(col_mask=mask))
    return {name: out[name] for name in RELATION_NAMES}


def torus_unitary(z1: complex, z2: complex, z3: complex,
                  grid: TruncGrid) -> SparseOperator:
    """Diagonal unitary e_{i,j,k} -> z1^i z2^j z3^k e_{i,j,k}."""
    for z in (z1, z2, z3):
        if abs(abs(z) - 1.0) > 1e-12:
            raise ValueError(f"torus coordinate {z!r} is not unimodular")
    i, j, k = grid.coords
    diag = (np.asarray(z1, dtype=complex) ** i
            * np.asarray(z2, dtype=complex) ** j
            * np.asarray(z3, dtype=complex) ** k)
    return SparseOperator.diagonal(grid, diag)


def covariance_residual(gens: GeneratorSet, z1: complex, z2: complex,
                        z3: complex) -> float:
    """Entrywise residual of U_z pi(g) U_z^* = chi_g(z) pi(g) for
    g in {a, b, D} (the circle actions scale the generators by z1, z2,
    z3 respectively); exact up to rounding, including at the cuts."""
    u = torus_unitary(z1, z2, z3, gens.grid)
    res = 0.0
    for g, chi in (("a", z1), ("b", z2), ("D", z3)):
        op = gens.op(g)
        res = max(res, (u @ op @ u.H - chi * op).max_abs())
    return res

"""Numerical probes of the commutant recurrences and the center
dichotomy of the represented algebra.

An operator T commuting with all six represented generators satisfies,
away from the truncation cuts, the structure law

    alpha^{(d,i,j)}_{(d',i',j')} = [d=d'] e^{2*pi*i*theta*j'(i-i')}
                                   * alpha^{(0,i-i',j-j')}_{(0,0,0)}

(input triple up, output triple down): no motion on the N leg, and a
two-leg Fourier family twisted by the theta phase.  commutant_solve
assembles the interior-column commutation constraints and returns a
nullspace basis; structure_residuals measures each solution against the
law.  center_dimension intersects the commutant condition with the span
of represented ordered monomials; for an irrational angle only scalars
survive, while a real deformation parameter contributes the whole
family of D powers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .hopf import AlgebraElement, BasisMonomial, QParam
from .rep import GeneratorSet, GridError, SparseOperator, TruncGrid, build_generators

GENERATOR_TAGS = ("a", "a*", "b", "b*", "D", "D*")


@dataclass
class CommutantSolution:
    """One nullspace element of the truncated commutation system.

    alpha maps ((d,i,j), (d',i',j')) to the coefficient of e_{d',i',j'}
    in T e_{d,i,j}; vec is the same data as a flat dim^2 vector.
    """

    grid: TruncGrid
    alpha: dict
    vec: np.ndarray

    def value(self, src, dst) -> complex:
        return self.alpha.get((tuple(src), tuple(dst)), 0j)


@dataclass(frozen=True)
class StructureReport:
    max_deviation: float
    offdiag_n_leg: float
    pairs_checked: int


@dataclass(frozen=True)
class CenterReport:
    dimension: int
    singular_values: tuple[float, ...]
    span_rank: int
    monomials: int
    threshold: float


def _constraint_matrix(gens: GeneratorSet, margin: int | None = None):
    """Sparse matrix of the linear system [T, pi(g)] = 0, g over all six
    generators, one equation per (generator, output row, interior input
    column); unknowns are all dim^2 entries of T, flat index w*dim + u
    for <e_w| T |e_u>."""
    grid = gens.grid
    dim = grid.dim
    mask = grid.interior_mask(margin)
    interior = np.nonzero(mask)[0]
    rows, cols, data = [], [], []
    eq = 0
    for tag in GENERATOR_TAGS:
        g = gens.op(tag).mat
        gc = g.tocsc()
        for v in interior:
            # [T,g] e_v = T(g e_v) - g(T e_v); one equation per output w
            col = gc.getcol(int(v)).tocoo()
            for w in range(dim):
                base = eq + w
                for u, gv in zip(col.row, col.data):
                    rows.append(base)
                    cols.append(w * dim + int(u))
                    data.append(gv)
                grow = g.getrow(w).tocoo()
                for wp, gv in zip(grow.col, grow.data):
                    rows.append(base)
                    cols.append(int(wp) * dim + int(v))
                    data.append(-gv)
            eq += dim
    mat = sp.coo_matrix((data, (rows, cols)), shape=(eq, dim * dim),
                        dtype=complex)
    mat.sum_duplicates()
    return mat.tocsr()


def commutant_solve(gens: GeneratorSet, cap: int = 10_000,
                    rank_tol: float = 1e-10) -> list[CommutantSolution]:
    """Basis of the nullspace of the interior commutation system.

    Unknowns live on the whole grid while equations are imposed only on
    interior input columns, so besides the genuine Fourier-type family
    the basis contains junk supported on boundary columns; all structure
    checks therefore quantify over interior index pairs.  Refuses grids
    with dim^2 beyond `cap` (dense nullspace computation).
    """
    grid = gens.grid
    if grid.dim ** 2 > cap:
        raise GridError(
            f"dim^2 = {grid.dim ** 2} exceeds the dense solve cap {cap}")
    if grid.interior_margin < 1:
        raise GridError("commutant_solve needs interior_margin >= 1")
    a = _constraint_matrix(gens).toarray()
    basis = scipy.linalg.null_space(a, rcond=rank_tol)
    dim = grid.dim
    out = []
    for col in range(basis.shape[1]):
        vec = basis[:, col]
        alpha = {}
        for flat in np.nonzero(np.abs(vec) > 1e-12)[0]:
            w, u = divmod(int(flat), dim)
            alpha[(grid.triple(u), grid.triple(w))] = complex(vec[flat])
        out.append(CommutantSolution(grid=grid, alpha=alpha, vec=vec))
    return out


def constraint_residual(gens: GeneratorSet, op: SparseOperator,
                        margin: int | None = None) -> float:
    """Max entry of [op, pi(g)] over interior input columns, all g."""
    mask = gens.grid.interior_mask(margin)
    res = 0.0
    for tag in GENERATOR_TAGS:
        g = gens.op(tag)
        res = max(res, (op @ g - g @ op).max_abs(col_mask=mask))
    return res


def structure_residuals(sol: CommutantSolution, qp: QParam,
                        shift_window: int | None = None) -> StructureReport:
    """Deviation of a solution from the predicted commutant form.

    The Fourier datum F(s,t) is read off the solution itself at the
    anchor column (0,s,t) against the output (0,0,0).  Only interior
    index pairs with componentwise shift at most `shift_window` are
    compared: larger shifts anchor at columns the truncated system
    leaves unconstrained, so they cannot be validated either way.
    Defaults to the grid's interior margin (the shifts the truncation
    keeps alive).
    """
    grid = sol.grid
    window = grid.interior_margin if shift_window is None else shift_window
    interior = grid.interior_triples()
    dev = 0.0
    off_n = 0.0
    pairs = 0
    for src in interior:
        d, i, j = src
        for dst in interior:
            dp, ip, jp = dst
            actual = sol.value(src, dst)
            if d != dp:
                off_n = max(off_n, abs(actual))
                continue
            s, t = i - ip, j - jp
            if abs(s) > window or abs(t) > window:
                continue
            anchor = sol.value((0, s, t), (0, 0, 0)) if grid.in_grid(0, s, t) else 0j
            predicted = qp.unit_phase(jp * s) * anchor
            dev = max(dev, abs(actual - predicted))
            pairs += 1
    return StructureReport(max_deviation=dev, offdiag_n_leg=off_n,
                           pairs_checked=pairs)


def translation_residual(sol: CommutantSolution, axis: str = "mid") -> float:
    """Residual of the translation laws along the N leg
    (alpha^{(d+r,i,j)}_{(d+r,i',j')} = alpha^{(d,i,j)}_{(d,i',j')}) or
    the middle leg (both i indices shifted), over interior pairs."""
    grid = sol.grid
    interior = set(grid.interior_triples())
    res = 0.0
    for src in interior:
        d, i, j = src
        for dst in interior:
            dp, ip, jp = dst
            if d != dp:
                continue
            if axis == "n":
                shifted = ((d + 1, i, j), (dp + 1, ip, jp))
            elif axis == "mid":
                shifted = ((d, i + 1, j), (dp, ip + 1, jp))
            else:
                raise ValueError("axis must be 'n' or 'mid'")
            if shifted[0] not in interior or shifted[1] not in interior:
                continue
            res = max(res, abs(sol.value(*shifted) - sol.value(src, dst)))
    return res


# ---------------------------------------------------------------------------
# center probe
# ---------------------------------------------------------------------------

def _monomial_family(m_cut: int):
    return [BasisMonomial(n, m, k, l)
            for n in range(-m_cut, m_cut + 1)
            for m in range(0, m_cut + 1)
            for k in range(0, m_cut + 1)
            for l in range(-m_cut, m_cut + 1)]


def center_report(qp: QParam, grid: TruncGrid, m_cut: int,
                  sv_threshold: float = 1e-6) -> CenterReport:
    """Dimension of (commutant condition) intersect (span of represented
    monomials with |n|, m, k, |l| <= m_cut).

    The monomial span is first orthonormalized (Frobenius inner
    products); the commutators of the orthonormal basis with the six
    generators, restricted to interior input columns, form the
    constraint map whose singular values below `sv_threshold` count the
    center directions.  The margin is widened to m_cut + 1 when needed
    so monomial actions on interior columns are truncation-free.
    """
    if m_cut < 0:
        raise ValueError("m_cut must be >= 0")
    margin = max(grid.interior_margin, m_cut + 1)
    if margin >= min(grid.n_cut, grid.z_cut):
        raise GridError(f"grid too small for monomial cutoff {m_cut}")
    gens = build_generators(qp, grid)
    family = _monomial_family(m_cut)
    mats = [gens.monomial_operator(mono).mat for mono in family]
    # normalize columns so the rank thresholds are scale-free
    norms = [math.sqrt(abs((m.conj().multiply(m)).sum())) for m in mats]
    mats = [m / n if n > 0 else m for m, n in zip(mats, norms)]

    def frob(x, y) -> complex:
        return complex((x.conj().multiply(y)).sum())

    nfam = len(family)
    gram = np.empty((nfam, nfam), dtype=complex)
    for p in range(nfam):
        for r in range(p, nfam):
            v = frob(mats[p], mats[r])
            gram[p, r] = v
            gram[r, p] = v.conjugate()
    evals, evecs = np.linalg.eigh(gram)
    keep = evals > 1e-12 * max(1.0, float(evals[-1]))
    span_rank = int(np.count_nonzero(keep))
    basis_coeff = evecs[:, keep] / np.sqrt(evals[keep])

    mask = grid.interior_mask(margin)
    cols = np.nonzero(mask)[0]
    gmats = [gens.op(tag).mat for tag in GENERATOR_TAGS]
    # commutators of each orthonormal span vector, interior columns only
    constraint_cols = []
    for c in range(span_rank):
        combo = sum(basis_coeff[p, c] * mats[p] for p in range(nfam))
        stacked = sp.vstack([(combo @ g - g @ combo)[:, cols] for g in gmats])
        constraint_cols.append(stacked.tocsr())
    small = np.empty((span_rank, span_rank), dtype=complex)
    for p in range(span_rank):
        for r in range(p, span_rank):
            v = frob(constraint_cols[p], constraint_cols[r])
            small[p, r] = v
            small[r, p] = v.conjugate()
    svals = np.sqrt(np.maximum(np.linalg.eigvalsh(small), 0.0))
    dimension = int(np.count_nonzero(svals < sv_threshold))
    return CenterReport(dimension=dimension,
                        singular_values=tuple(float(s) for s in np.sort(svals)),
                        span_rank=span_rank, monomials=nfam,
                        threshold=sv_threshold)


def center_dimension(qp: QParam, grid: TruncGrid, m_cut: int,
                     sv_threshold: float = 1e-6) -> int:
    return center_report(qp, grid, m_cut, sv_threshold).dimension

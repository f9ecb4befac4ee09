"""Exact symbolic arithmetic in the polynomial *-algebra of U_q(2).

The algebra is generated by a, b, D with b normal, D unitary, and

    ba = q ab        a*b = q ba*       bb* = b*b       aa* + bb* = 1
    aD = Da          bD  = w Db        DD* = D*D = 1   a*a + |q|^2 b*b = 1

where q is the deformation parameter (0 < |q| < 1) and w = q^2/|q|^2
= e^{2*pi*i*theta} with theta = arg(q)/pi.  Elements are stored in the
ordered-monomial basis <n,m,k,l>, meaning a^n b^m (b*)^k D^l for n >= 0
and (a*)^{-n} b^m (b*)^k D^l for n < 0 (m, k >= 0; n, l signed, with
D^{-1} = D*).

The complete two-letter reordering table, obtained from the defining
relations by taking adjoints and inverses (the fuzzed associativity
suite in the tests doubles as the confluence check):

    word    normal form            word    normal form
    b a     q      a b             D b     w^-1  b D
    b a*    q^-1   a* b            D b*    w     b* D
    b* a    qbar   a b*            D* b    w     b D*
    b* a*   qbar^-1 a* b*          D* b*   w^-1  b* D*
    b* b    b b*                   D a = a D,  D a* = a* D  (and for D*)
    a a*    1 - b b*               D D* = D* D = 1
    a* a    1 - |q|^2 b b*

All phases e^{2*pi*i*theta*k} are computed from the stored theta, never
by recovering arg(q) from a complex number.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product as _cartesian
from typing import Callable, Iterator, NamedTuple

#: coefficients with magnitude below this are pruned from all elements
PRUNE_TOL = 1e-14


class RewriteOverflowError(RuntimeError):
    """Normal ordering exceeded its termination bound (should not happen)."""


# ---------------------------------------------------------------------------
# deformation parameter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QParam:
    """Deformation parameter q = modulus * e^{i*pi*theta}, 0 < modulus < 1.

    theta is arg(q)/pi, stored explicitly and reduced mod 2 so that the
    unit phases w^k = e^{2*pi*i*theta*k} appearing in the relations are
    always computed from theta directly.
    """

    modulus: float
    theta: float
    warnings: tuple[str, ...] = ()

    @property
    def q(self) -> complex:
        return self.qpow(1)

    def qpow(self, n: int) -> complex:
        """q^n for signed integer n."""
        return self.modulus ** n * cmath.exp(1j * math.pi * self.theta * n)

    def qbarpow(self, n: int) -> complex:
        """conj(q)^n for signed integer n."""
        return self.modulus ** n * cmath.exp(-1j * math.pi * self.theta * n)

    def unit_phase(self, t: float) -> complex:
        """e^{2*pi*i*theta*t}; the commutation phase w equals unit_phase(1)."""
        return cmath.exp(2j * math.pi * self.theta * t)

    @property
    def is_real(self) -> bool:
        return self.theta == 0.0 or self.theta == 1.0


def _near_rational(theta: float, max_den: int = 64, tol: float = 1e-9):
    frac = Fraction(theta).limit_denominator(max_den)
    if abs(theta - float(frac)) < tol:
        return frac
    return None


def make_qparam(modulus: float, theta: float) -> QParam:
    """Validate and normalize a deformation parameter.

    modulus must lie strictly inside (0, 1); parameters outside the unit
    disk are equivalent to one inside it under q -> 1/q, q -> conj(q),
    so the caller should reduce first.  theta is taken in units of pi
    and reduced mod 2.  A theta within 1e-9 of a rational with
    denominator <= 64 gets a warning code: most probes here assume an
    irrational angle.
    """
    if not (0.0 < modulus < 1.0) or not math.isfinite(modulus):
        raise ValueError(
            f"modulus {modulus!r} outside (0,1); apply the q -> 1/q or "
            "q -> conj(q) equivalences to move the parameter into the "
            "open unit disk first"
        )
    if not math.isfinite(theta):
        raise ValueError(f"theta {theta!r} is not finite")
    theta = theta % 2.0
    warnings = ()
    frac = _near_rational(theta)
    if frac is not None:
        warnings = (f"theta_near_rational:{frac.numerator}/{frac.denominator}",)
    return QParam(modulus=modulus, theta=theta, warnings=warnings)


# ---------------------------------------------------------------------------
# basis monomials
# ---------------------------------------------------------------------------

class BasisMonomial(NamedTuple):
    """Ordered monomial <n,m,k,l>: a-power n (signed), b-power m,
    b*-power k, D-power l (signed)."""

    n: int
    m: int
    k: int
    l: int

    def degree(self) -> int:
        return max(abs(self.n), self.m, self.k, abs(self.l))

    def adjoint_letters(self) -> int:
        return abs(self.n) + self.m + self.k + abs(self.l)

    def __repr__(self) -> str:
        return f"<{self.n},{self.m},{self.k},{self.l}>"


MONO_ONE = BasisMonomial(0, 0, 0, 0)
MONO_A = BasisMonomial(1, 0, 0, 0)
MONO_ASTAR = BasisMonomial(-1, 0, 0, 0)
MONO_B = BasisMonomial(0, 1, 0, 0)
MONO_BSTAR = BasisMonomial(0, 0, 1, 0)
MONO_D = BasisMonomial(0, 0, 0, 1)
MONO_DSTAR = BasisMonomial(0, 0, 0, -1)

GENERATORS = {
    "a": MONO_A, "a*": MONO_ASTAR,
    "b": MONO_B, "b*": MONO_BSTAR,
    "D": MONO_D, "D*": MONO_DSTAR,
}


def _validated(mono) -> BasisMonomial:
    mono = BasisMonomial(*mono)
    if mono.m < 0 or mono.k < 0:
        raise ValueError(f"b and b* powers must be nonnegative, got {mono}")
    return mono


# ---------------------------------------------------------------------------
# algebra elements
# ---------------------------------------------------------------------------

class AlgebraElement:
    """Finite complex-linear combination of basis monomials.

    Immutable by convention: operations return new instances and never
    mutate their arguments, so values are safe to share across threads.
    """

    __slots__ = ("qp", "terms")

    def __init__(self, qp: QParam, terms=None, prune: bool = True):
        self.qp = qp
        if terms is None:
            terms = {}
        if prune:
            terms = {m: c for m, c in terms.items() if abs(c) > PRUNE_TOL}
        self.terms = terms

    # -- constructors --
    @classmethod
    def monomial(cls, qp, mono, coeff=1.0) -> "AlgebraElement":
        return cls(qp, {_validated(mono): complex(coeff)})

    @classmethod
    def unit(cls, qp) -> "AlgebraElement":
        return cls(qp, {MONO_ONE: 1.0 + 0j})

    @classmethod
    def zero(cls, qp) -> "AlgebraElement":
        return cls(qp, {})

    @classmethod
    def generator(cls, qp, name: str) -> "AlgebraElement":
        return cls(qp, {GENERATORS[name]: 1.0 + 0j})

    # -- linear structure --
    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check_context(other)
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0.0) + c
        return AlgebraElement(self.qp, terms)

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        return self + (-1.0) * other

    def __neg__(self) -> "AlgebraElement":
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            return multiply(self, other)
        c = complex(other)
        return AlgebraElement(self.qp, {m: v * c for m, v in self.terms.items()})

    def __rmul__(self, other):
        return self * other

    def _check_context(self, other: "AlgebraElement"):
        if (self.qp.modulus, self.qp.theta) != (other.qp.modulus, other.qp.theta):
            raise ValueError("elements belong to different deformation parameters")

    # -- queries --
    def norm1(self) -> float:
        return sum(abs(c) for c in self.terms.values())

    def coeff(self, mono) -> complex:
        return self.terms.get(BasisMonomial(*mono), 0.0 + 0j)

    def degree(self) -> int:
        return max((m.degree() for m in self.terms), default=0)

    def isclose(self, other: "AlgebraElement", tol: float = 1e-10) -> bool:
        return (self - other).norm1() <= tol

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[BasisMonomial, complex]]:
        return iter(self.terms.items())

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = [f"({c:.6g})*{m!r}" for m, c in list(self.terms.items())[:8]]
        if len(self.terms) > 8:
            parts.append(f"... ({len(self.terms)} terms)")
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# monomial product (closed form with recursive sphere reduction)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _ablock(modulus: float, n1: int, n2: int) -> tuple:
    """Normal form of the product of two pure a-blocks a^{n1} * a^{n2}
    (signed exponents).  Returns a tuple of ((nprime, mu), coeff) with
    each entry standing for <nprime, mu, mu, 0>.

    Opposite-sign blocks collide and reduce through the two sphere
    relations aa* = 1 - bb* and a*a = 1 - |q|^2 bb*; same-sign blocks
    just merge.
    """
    if n1 == 0 or n2 == 0 or (n1 > 0) == (n2 > 0):
        return (((n1 + n2, 0), 1.0 + 0j),)
    r2 = modulus * modulus
    if n1 > 0 > n2:
        # a^p (a*)^r: peel one aa* -> 1 - bb*; the bb* then commutes out
        # to the right past the surviving (a*)^{r-1}, each a* costing
        # |q|^{-2}
        r = -n2
        inner = _ablock(modulus, n1 - 1, n2 + 1)
        extra = -(r2 ** (-(r - 1)))
    else:
        # (a*)^r a^p: peel a*a -> 1 - |q|^2 bb*; the bb* commutes out
        # past a^{p-1}, each a costing |q|^{+2}
        p = n2
        inner = _ablock(modulus, n1 + 1, n2 - 1)
        extra = -(r2 ** p)
    out = {}
    for (npr, mu), c in inner:
        out[(npr, mu)] = out.get((npr, mu), 0j) + c
        key = (npr, mu + 1)
        out[key] = out.get(key, 0j) + c * extra
    return tuple(sorted(out.items()))


def _mono_mul(qp: QParam, x: BasisMonomial, y: BasisMonomial) -> dict:
    """Product of two basis monomials in normal form, as a terms dict.

    D-letters of x commute past the a- and b-letters of y with the pure
    phase w^{l1(k2-m2)}, the a-block of y moves left past the b-letters
    of x with q^{n2*m1} qbar^{n2*k1}, and colliding a-blocks reduce via
    _ablock.  The bb* pairs created by the sphere relations merge into
    the b-blocks without further phases (b and b* commute).
    """
    n1, m1, k1, l1 = x
    n2, m2, k2, l2 = y
    phase = (qp.qpow(n2 * m1) * qp.qbarpow(n2 * k1)
             * qp.unit_phase(l1 * (k2 - m2)))
    mm, kk, ll = m1 + m2, k1 + k2, l1 + l2
    if n1 == 0 or n2 == 0 or (n1 > 0) == (n2 > 0):
        return {BasisMonomial(n1 + n2, mm, kk, ll): phase}
    out = {}
    for (npr, mu), c in _ablock(qp.modulus, n1, n2):
        out[BasisMonomial(npr, mm + mu, kk + mu, ll)] = phase * c
    return out


def multiply(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    """Product in the algebra; the result is in normal form <n,m,k,l>."""
    x._check_context(y)
    acc = {}
    for mx, cx in x.terms.items():
        for my, cy in y.terms.items():
            c = cx * cy
            for mono, w in _mono_mul(x.qp, mx, my).items():
                acc[mono] = acc.get(mono, 0j) + c * w
    return AlgebraElement(x.qp, acc)


def star(x: AlgebraElement) -> AlgebraElement:
    """Antilinear antimultiplicative involution, result in normal form.

    On a monomial: star(<n,m,k,l>) = q^{-nk} qbar^{-nm} w^{l(k-m)}
    <-n,k,m,-l>, obtained by reversing the adjoint word and reordering.
    """
    qp = x.qp
    acc = {}
    for (n, m, k, l), c in x.terms.items():
        w = (qp.qpow(-n * k) * qp.qbarpow(-n * m) * qp.unit_phase(l * (k - m)))
        mono = BasisMonomial(-n, k, m, -l)
        acc[mono] = acc.get(mono, 0j) + c.conjugate() * w
    return AlgebraElement(qp, acc)


def counit(x: AlgebraElement) -> complex:
    """Counit: 1 on a, a*, D, D*, 0 on b, b*, extended multiplicatively."""
    return sum((c for (n, m, k, l), c in x.terms.items() if m == 0 and k == 0),
               start=0j)


# ---------------------------------------------------------------------------
# tensor elements (coproduct values and Hopf-axiom plumbing)
# ---------------------------------------------------------------------------

class TensorElement:
    """Finite linear combination of monomial tuples (one monomial per
    tensor leg).  Two legs for coproduct values; leg-insertion routines
    below produce higher leg counts for the coassociativity checks."""

    __slots__ = ("qp", "legs", "terms")

    def __init__(self, qp: QParam, legs: int, terms=None, prune: bool = True):
        self.qp = qp
        self.legs = legs
        if terms is None:
            terms = {}
        if prune:
            terms = {t: c for t, c in terms.items() if abs(c) > PRUNE_TOL}
        self.terms = terms

    @classmethod
    def unit(cls, qp, legs: int = 2) -> "TensorElement":
        return cls(qp, legs, {(MONO_ONE,) * legs: 1.0 + 0j})

    def __add__(self, other: "TensorElement") -> "TensorElement":
        if self.legs != other.legs:
            raise ValueError("tensor leg counts differ")
        terms = dict(self.terms)
        for t, c in other.terms.items():
            terms[t] = terms.get(t, 0j) + c
        return TensorElement(self.qp, self.legs, terms)

    def __sub__(self, other: "TensorElement") -> "TensorElement":
        return self + (-1.0) * other

    def __mul__(self, other):
        if isinstance(other, TensorElement):
            return tensor_multiply(self, other)
        c = complex(other)
        return TensorElement(self.qp, self.legs,
                             {t: v * c for t, v in self.terms.items()})

    __rmul__ = __mul__

    def norm1(self) -> float:
        return sum(abs(c) for c in self.terms.values())

    def isclose(self, other: "TensorElement", tol: float = 1e-10) -> bool:
        return (self - other).norm1() <= tol

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for t, c in list(self.terms.items())[:6]:
            parts.append(f"({c:.4g})*" + "(x)".join(repr(m) for m in t))
        if len(self.terms) > 6:
            parts.append(f"... ({len(self.terms)} terms)")
        return " + ".join(parts)


def tensor_multiply(s: TensorElement, t: TensorElement) -> TensorElement:
    """Legwise product: (x1 (x) y1)(x2 (x) y2) = x1x2 (x) y1y2."""
    if s.legs != t.legs:
        raise ValueError("tensor leg counts differ")
    qp = s.qp
    acc = {}
    for ts, cs in s.terms.items():
        for tt, ct in t.terms.items():
            c = cs * ct
            legs = [_mono_mul(qp, ms, mt) for ms, mt in zip(ts, tt)]
            for combo in _cartesian(*(lg.items() for lg in legs)):
                key = tuple(m for m, _ in combo)
                w = c
                for _, cw in combo:
                    w *= cw
                acc[key] = acc.get(key, 0j) + w
    return TensorElement(qp, s.legs, acc)


def _delta_letter_table(qp: QParam) -> dict:
    """Coproduct of each generator letter as a two-leg terms dict.

    Delta(a) = a(x)a - qbar b(x)Db*, Delta(b) = a(x)b + b(x)Da*,
    Delta(D) = D(x)D, extended to adjoints as a *-homomorphism; each leg
    is stored normal-ordered (Db* = w b*D, Da* = a*D, and the conjugate
    pair for the starred generators).  Note qbar*w = q.
    """
    q = qp.qpow(1)
    qbar = qp.qbarpow(1)
    return {
        "a": {(MONO_A, MONO_A): 1.0 + 0j,
              (MONO_B, BasisMonomial(0, 0, 1, 1)): -q},
        "a*": {(MONO_ASTAR, MONO_ASTAR): 1.0 + 0j,
               (MONO_BSTAR, BasisMonomial(0, 1, 0, -1)): -qbar * qp.unit_phase(-1)},
        "b": {(MONO_A, MONO_B): 1.0 + 0j,
              (MONO_B, BasisMonomial(-1, 0, 0, 1)): 1.0 + 0j},
        "b*": {(MONO_ASTAR, MONO_BSTAR): 1.0 + 0j,
               (MONO_BSTAR, BasisMonomial(1, 0, 0, -1)): 1.0 + 0j},
        "D": {(MONO_D, MONO_D): 1.0 + 0j},
        "D*": {(MONO_DSTAR, MONO_DSTAR): 1.0 + 0j},
    }


def _letter_sequence(mono: BasisMonomial) -> list[str]:
    """Generator letters of <n,m,k,l> read left to right."""
    n, m, k, l = mono
    letters = []
    letters += ["a"] * n if n >= 0 else ["a*"] * (-n)
    letters += ["b"] * m
    letters += ["b*"] * k
    letters += ["D"] * l if l >= 0 else ["D*"] * (-l)
    return letters


def comultiply(x: AlgebraElement) -> TensorElement:
    """Coproduct, extended to monomials multiplicatively; both tensor
    legs come out normal-ordered."""
    qp = x.qp
    table = _delta_letter_table(qp)
    acc = TensorElement(qp, 2)
    for mono, c in x.terms.items():
        cur = TensorElement.unit(qp, 2)
        for letter in _letter_sequence(mono):
            cur = tensor_multiply(cur, TensorElement(qp, 2, table[letter],
                                                     prune=False))
        acc = acc + c * cur
    return acc


def antipode(x: AlgebraElement) -> AlgebraElement:
    """Antipode: S(a) = a*, S(b) = -q bD*, S(D) = D*, S(a*) = a,
    S(b*) = -qbar^{-1} b*D, extended antihomomorphically (letters of a
    monomial are reversed before applying the generator values)."""
    qp = x.qp
    images = {
        "a": AlgebraElement.monomial(qp, MONO_ASTAR),
        "a*": AlgebraElement.monomial(qp, MONO_A),
        "b": AlgebraElement.monomial(qp, BasisMonomial(0, 1, 0, -1), -qp.qpow(1)),
        "b*": AlgebraElement.monomial(qp, BasisMonomial(0, 0, 1, 1),
                                      -1.0 / qp.qbarpow(1)),
        "D": AlgebraElement.monomial(qp, MONO_DSTAR),
        "D*": AlgebraElement.monomial(qp, MONO_D),
    }
    acc = AlgebraElement.zero(qp)
    for mono, c in x.terms.items():
        cur = AlgebraElement.unit(qp)
        for letter in reversed(_letter_sequence(mono)):
            cur = multiply(cur, images[letter])
        acc = acc + c * cur
    return acc


# -- leg utilities used by the Hopf-axiom and state-invariance checks --

def coapply(t: TensorElement, leg: int) -> TensorElement:
    """Apply the coproduct to one leg, increasing the leg count by one."""
    qp = t.qp
    acc = {}
    for key, c in t.terms.items():
        dd = comultiply(AlgebraElement.monomial(qp, key[leg]))
        for (u, v), w in dd.terms.items():
            nk = key[:leg] + (u, v) + key[leg + 1:]
            acc[nk] = acc.get(nk, 0j) + c * w
    return TensorElement(qp, t.legs + 1, acc)


def apply_functional(t: TensorElement, leg: int,
                     fn: Callable[[BasisMonomial], complex]):
    """Contract one leg with a linear functional given on monomials.

    Returns an AlgebraElement when one leg remains, else a TensorElement.
    """
    qp = t.qp
    acc = {}
    for key, c in t.terms.items():
        w = c * fn(key[leg])
        if w == 0:
            continue
        nk = key[:leg] + key[leg + 1:]
        acc[nk] = acc.get(nk, 0j) + w
    if t.legs == 2:
        return AlgebraElement(qp, {k[0]: v for k, v in acc.items()})
    return TensorElement(qp, t.legs - 1, acc)


def counit_leg(t: TensorElement, leg: int):
    return apply_functional(
        t, leg, lambda m: 1.0 + 0j if m.m == 0 and m.k == 0 else 0j)


def antipode_leg(t: TensorElement, leg: int) -> TensorElement:
    qp = t.qp
    acc = {}
    for key, c in t.terms.items():
        s = antipode(AlgebraElement.monomial(qp, key[leg]))
        for mono, w in s.terms.items():
            nk = key[:leg] + (mono,) + key[leg + 1:]
            acc[nk] = acc.get(nk, 0j) + c * w
    return TensorElement(qp, t.legs, acc)


def star_tensor(t: TensorElement) -> TensorElement:
    """Legwise star with conjugated coefficients."""
    qp = t.qp
    acc = {}
    for key, c in t.terms.items():
        pieces = [star(AlgebraElement.monomial(qp, m)) for m in key]
        for combo in _cartesian(*(p.terms.items() for p in pieces)):
            nk = tuple(m for m, _ in combo)
            w = c.conjugate()
            for _, cw in combo:
                w *= cw
            acc[nk] = acc.get(nk, 0j) + w
    return TensorElement(qp, t.legs, acc)


def fold_multiply(t: TensorElement) -> AlgebraElement:
    """Multiply all legs together left to right (the Hopf 'mult' map)."""
    qp = t.qp
    acc = AlgebraElement.zero(qp)
    for key, c in t.terms.items():
        cur = AlgebraElement.monomial(qp, key[0], c)
        for mono in key[1:]:
            cur = multiply(cur, AlgebraElement.monomial(qp, mono))
        acc = acc + cur
    return acc


# ---------------------------------------------------------------------------
# word rewriting engine (reference path for the closed-form product)
# ---------------------------------------------------------------------------

#: letter -> ordering class; normal words are sorted by class with pure
#: a- and D-blocks
_CLASS = {"a": 0, "a*": 0, "b": 1, "b*": 2, "D": 3, "D*": 3}


def word_of(mono: BasisMonomial) -> tuple[str, ...]:
    return tuple(_letter_sequence(mono))


def rewrite_step_bound(word_len: int, branch_pairs: int) -> int:
    """Termination bound for normal_order_word.

    Swap rules strictly decrease the inversion count (< L^2) at fixed
    letter multiset; the sphere and unitarity rules strictly decrease
    the number of a- plus D-letters (< L), so the per-branch step count
    is below (L+1)(L^2+1); sphere rules at most double the branch count.
    """
    return (2 ** branch_pairs) * (word_len + 1) * (word_len * word_len + 1)


def normal_order_word(qp: QParam, word) -> tuple[AlgebraElement, int]:
    """Rewrite an arbitrary generator word into normal form.

    Returns the normal-ordered element and the number of rule
    applications; raises RewriteOverflowError past the termination
    bound.  This is the slow reference path; `multiply` uses the closed
    form and the tests check the two against each other.
    """
    q = qp.qpow(1)
    qbar = qp.qbarpow(1)
    w = qp.unit_phase(1)
    wbar = qp.unit_phase(-1)
    r2 = qp.modulus ** 2
    swap = {
        ("b", "a"): q, ("b", "a*"): 1.0 / q,
        ("b*", "a"): qbar, ("b*", "a*"): 1.0 / qbar,
        ("D", "a"): 1.0, ("D", "a*"): 1.0, ("D*", "a"): 1.0, ("D*", "a*"): 1.0,
        ("D", "b"): wbar, ("D", "b*"): w, ("D*", "b"): w, ("D*", "b*"): wbar,
        ("b*", "b"): 1.0,
    }
    word = tuple(word)
    na = sum(1 for c in word if c == "a")
    nA = sum(1 for c in word if c == "a*")
    bound = rewrite_step_bound(len(word), min(na, nA))
    steps = 0
    done = {}
    stack = [(1.0 + 0j, list(word))]
    while stack:
        coeff, letters = stack.pop()
        i = 0
        reduced = False
        while i < len(letters) - 1:
            pair = (letters[i], letters[i + 1])
            steps += 1
            if steps > bound:
                raise RewriteOverflowError(
                    f"exceeded {bound} steps on word of length {len(word)}")
            if pair in swap:
                letters[i], letters[i + 1] = letters[i + 1], letters[i]
                coeff *= swap[pair]
                # resume one position back: the moved letter may create
                # a new inversion to its left
                i = max(i - 1, 0)
                continue
            if pair in (("D", "D*"), ("D*", "D")):
                del letters[i:i + 2]
                i = max(i - 1, 0)
                continue
            if pair in (("a", "a*"), ("a*", "a")):
                rest = letters[i + 2:]
                head = letters[:i]
                stack.append((coeff, head + rest))
                fac = 1.0 if pair == ("a", "a*") else r2
                stack.append((-coeff * fac, head + ["b", "b*"] + rest))
                reduced = True
                break
            i += 1
        if reduced:
            continue
        mono = _parse_normal_word(letters)
        done[mono] = done.get(mono, 0j) + coeff
    return AlgebraElement(qp, done), steps


def _parse_normal_word(letters) -> BasisMonomial:
    n = m = k = l = 0
    for c in letters:
        if c == "a":
            n += 1
        elif c == "a*":
            n -= 1
        elif c == "b":
            m += 1
        elif c == "b*":
            k += 1
        elif c == "D":
            l += 1
        else:
            l -= 1
    return BasisMonomial(n, m, k, l)


def multiply_by_rewriting(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    """Product computed through the letter-rewriting engine (reference)."""
    x._check_context(y)
    acc = AlgebraElement.zero(x.qp)
    for mx, cx in x.terms.items():
        for my, cy in y.terms.items():
            elem, _ = normal_order_word(x.qp, word_of(mx) + word_of(my))
            acc = acc + (cx * cy) * elem
    return acc

"""Noncommutative polynomial algebra over the bosonic extended phase space.

Generators are ``phi^a``, ``lambda_a``, ``pi^a`` and ``xi_a`` (the last two
optionally carrying a copy label for the multi-slot spaces used by the form
calculus), plus commuting *classical symbols* ``H_S`` standing for partial
derivatives of a Hamiltonian function.  Coefficients are exact Gaussian
rationals, so every identity is decided with zero tolerance.

The only nontrivial commutators are::

    [phi^a, lambda_b] = i delta^a_b
    [xi_a, pi^b]      = i delta^b_a      (same copy only)
    [lambda_a, H_S]   = -i H_{S+a}

and everything else commutes.  Canonical order puts classical symbols first,
then ``phi < pi < xi < lambda``; inside a family letters are sorted by copy and
index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, NamedTuple

import numpy as np
from sympy.polys.domains import QQ, QQ_I

__all__ = [
    "CLASSICAL", "PHI", "PI", "XI", "LAMBDA", "H1", "H2",
    "Letter", "SymplecticConvention", "GradedPolynomial", "ConventionError",
    "phi", "lam", "pi", "xi", "hsym", "const", "ONE_I",
    "multiply", "normal_order", "commutator", "commutator_naive", "dagger", "equals",
    "derivative", "drop_family", "to_gaussian", "total", "random_polynomial",
]

# letter ranks; tuple comparison on Letter gives the canonical order
CLASSICAL, PHI, PI, XI, LAMBDA = 0, 1, 2, 3, 4
H1, H2 = 1, 2

_FAMILY_NAMES = {PHI: "φ", PI: "π", XI: "ξ", LAMBDA: "λ"}

ONE_I = QQ_I(0, 1)
_ZERO = QQ_I(0, 0)
_ONE = QQ_I(1, 0)


class ConventionError(ValueError):
    """Operands built on different symplectic conventions were combined."""


class Letter(NamedTuple):
    """One factor of a word.

    For generators ``tag`` is the copy label (0 = unlabeled) and ``index`` the
    1-based phase-space index.  For classical symbols ``tag`` is the function
    family (``H1``/``H2``) and ``index`` the sorted tuple of derivative indices.
    """

    rank: int
    tag: int
    index: object

    @property
    def is_classical(self) -> bool:
        return self.rank == CLASSICAL

    def render(self) -> str:
        if self.rank == CLASSICAL:
            name = "H" if self.tag == H1 else "G"
            if not self.index:
                return name
            return name + "_{" + "".join(str(i) for i in self.index) + "}"
        base = _FAMILY_NAMES[self.rank]
        copy = f"({self.tag})" if self.tag else ""
        if self.rank in (PHI, PI):
            return f"{base}^{self.index}{'_' + copy if copy else ''}"
        return f"{base}_{self.index}{'^' + copy if copy else ''}"


def to_gaussian(x) -> object:
    """Coerce ints, Fractions, sympy rationals and exact complex values to QQ_I."""
    if isinstance(x, type(_ONE)):
        return x
    if isinstance(x, bool):
        raise TypeError("boolean is not a coefficient")
    if isinstance(x, int):
        return QQ_I(x, 0)
    if isinstance(x, Fraction):
        return QQ_I(QQ(x.numerator, x.denominator), 0)
    if isinstance(x, complex):
        re, im = Fraction(x.real), Fraction(x.imag)
        if x.real != float(re) or x.imag != float(im):
            raise TypeError(f"inexact complex coefficient {x!r}")
        return QQ_I(QQ(re.numerator, re.denominator), QQ(im.numerator, im.denominator))
    if isinstance(x, float):
        if not x.is_integer():
            raise TypeError(f"float coefficient {x!r} is not exact; pass a Fraction")
        return QQ_I(int(x), 0)
    try:
        return QQ_I.from_sympy(x)
    except Exception as exc:  # noqa: BLE001
        raise TypeError(f"cannot use {x!r} as an exact coefficient") from exc


def _conj(c):
    return QQ_I(c.x, -c.y)


@dataclass(frozen=True)
class SymplecticConvention:
    """Numeric symplectic matrix threaded through every module.

    ``upper`` is omega^{ab}; ``lower`` is its inverse omega_{ab}.  The default
    orders phase space as (q, p) with omega = [[0, I], [-I, 0]].
    """

    n: int
    upper: tuple = field(repr=False)
    lower: tuple = field(repr=False)
    label: str = "qp"

    @classmethod
    def standard(cls, n: int = 1) -> "SymplecticConvention":
        w = np.zeros((2 * n, 2 * n), dtype=int)
        w[:n, n:] = np.eye(n, dtype=int)
        w[n:, :n] = -np.eye(n, dtype=int)
        return cls.from_matrix(w, label="qp")

    @classmethod
    def swapped(cls, n: int = 1) -> "SymplecticConvention":
        """The (p, q) ordering; omega flips sign relative to ``standard``."""
        return cls.from_matrix(-cls.standard(n).omega, label="pq")

    @classmethod
    def from_matrix(cls, w, label: str = "custom") -> "SymplecticConvention":
        w = np.asarray(w)
        dim = w.shape[0]
        if w.shape != (dim, dim) or dim % 2:
            raise ValueError("omega must be a square matrix of even size")
        if not np.array_equal(w, -w.T):
            raise ValueError("omega must be antisymmetric")
        inv = np.linalg.inv(w.astype(float))
        inv_int = np.rint(inv).astype(int)
        if not np.allclose(inv, inv_int) or not np.array_equal(w @ inv_int, np.eye(dim, dtype=int)):
            raise ValueError("omega must be integer-invertible")
        return cls(
            n=dim // 2,
            upper=tuple(tuple(int(v) for v in row) for row in w),
            lower=tuple(tuple(int(v) for v in row) for row in inv_int),
            label=label,
        )

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def omega(self) -> np.ndarray:
        return np.array(self.upper, dtype=int)

    @property
    def omega_lower(self) -> np.ndarray:
        return np.array(self.lower, dtype=int)

    def w(self, a: int, b: int) -> int:
        """omega^{ab} with 1-based indices."""
        return self.upper[a - 1][b - 1]

    def wl(self, a: int, b: int) -> int:
        """omega_{ab} with 1-based indices."""
        return self.lower[a - 1][b - 1]

    @property
    def indices(self) -> range:
        return range(1, self.dim + 1)


class GradedPolynomial:
    """Finite linear combination of words with Gaussian-rational coefficients.

    Instances are immutable.  Products are free (no reordering); call
    :func:`normal_order` to reach the canonical form.
    """

    __slots__ = ("conv", "_terms", "_hash")

    def __init__(self, conv: SymplecticConvention, terms: Mapping[tuple, object] | None = None):
        self.conv = conv
        merged: dict[tuple, object] = {}
        for word, c in (terms or {}).items():
            c = to_gaussian(c)
            if not c:
                continue
            _validate_word(word, conv)
            merged[word] = merged.get(word, _ZERO) + c
        self._terms = {w: c for w, c in merged.items() if c}
        self._hash = None

    # construction helpers -------------------------------------------------
    @classmethod
    def _raw(cls, conv, terms: dict) -> "GradedPolynomial":
        obj = cls.__new__(cls)
        obj.conv = conv
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def scalar(cls, conv: SymplecticConvention, c=1) -> "GradedPolynomial":
        return cls(conv, {(): c})

    @classmethod
    def zero(cls, conv: SymplecticConvention) -> "GradedPolynomial":
        return cls._raw(conv, {})

    @classmethod
    def letter(cls, conv: SymplecticConvention, letter: Letter) -> "GradedPolynomial":
        return cls(conv, {(letter,): 1})

    # inspection -----------------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def letters(self) -> set:
        return {x for w in self._terms for x in w}

    def is_canonical(self) -> bool:
        return all(_is_sorted(w) for w in self._terms)

    # arithmetic -----------------------------------------------------------
    def _check(self, other: "GradedPolynomial"):
        if self.conv != other.conv:
            raise ConventionError(f"convention mismatch: {self.conv} vs {other.conv}")

    def _coerce(self, other) -> "GradedPolynomial":
        if isinstance(other, GradedPolynomial):
            self._check(other)
            return other
        return GradedPolynomial.scalar(self.conv, other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for w, c in other._terms.items():
            v = out.get(w, _ZERO) + c
            if v:
                out[w] = v
            else:
                out.pop(w, None)
        return GradedPolynomial._raw(self.conv, out)

    __radd__ = __add__

    def __neg__(self):
        return GradedPolynomial._raw(self.conv, {w: -c for w, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, GradedPolynomial):
            return multiply(self, other)
        c = to_gaussian(other)
        if not c:
            return GradedPolynomial.zero(self.conv)
        return GradedPolynomial._raw(self.conv, {w: v * c for w, v in self._terms.items()})

    def __rmul__(self, other):
        c = to_gaussian(other)
        if not c:
            return GradedPolynomial.zero(self.conv)
        return GradedPolynomial._raw(self.conv, {w: c * v for w, v in self._terms.items()})

    def __eq__(self, other):
        # structural equality of stored terms; algebraic identity is `equals`
        if isinstance(other, GradedPolynomial):
            return self.conv == other.conv and self._terms == other._terms
        if other == 0:
            return not self._terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.conv, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"GradedPolynomial({self.pretty()})"

    def pretty(self) -> str:
        """Canonical text rendering, e.g. ``−i H_{11} π^1 ξ_1``."""
        if not self._terms:
            return "0"
        parts = []
        for w in sorted(self._terms, key=lambda w: (len(w), w)):
            c = self._terms[w]
            coef = _render_coeff(c, bare=bool(w))
            body = " ".join(x.render() for x in w)
            text = (coef + " " + body).strip() if body else coef
            parts.append(text)
        out = parts[0]
        for p in parts[1:]:
            out += " − " + p[1:] if p.startswith("−") else " + " + p
        return out


def _render_coeff(c, bare: bool) -> str:
    re, im = c.x, c.y

    def num(v):
        return str(int(v)) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"

    if im == 0:
        if bare and re == 1:
            return ""
        if bare and re == -1:
            return "−"
        return ("−" + num(-re)) if re < 0 else num(re)
    if re == 0:
        if im == 1:
            return "i"
        if im == -1:
            return "−i"
        return ("−" + num(-im) if im < 0 else num(im)) + "i"
    sign = "−" if im < 0 else "+"
    return f"({num(re)} {sign} {num(abs(im))}i)"


def _validate_word(word: tuple, conv: SymplecticConvention):
    dim = conv.dim
    for x in word:
        if not isinstance(x, Letter):
            raise TypeError(f"word entries must be Letters, got {x!r}")
        if x.rank == CLASSICAL:
            if x.tag not in (H1, H2):
                raise ValueError(f"unknown classical family {x.tag}")
            if tuple(sorted(x.index)) != tuple(x.index) or any(not 1 <= i <= dim for i in x.index):
                raise ValueError(f"bad derivative indices {x.index} for n={conv.n}")
            continue
        if not 1 <= x.index <= dim:
            raise ValueError(f"index {x.index} outside 1..{dim}")
        if x.tag:
            if x.rank in (PHI, LAMBDA):
                raise ValueError("copy labels are only allowed on pi and xi")
            if not 1 <= x.tag <= dim:
                raise ValueError(f"copy label {x.tag} outside 1..{dim}")


# ---------------------------------------------------------------------------
# letter constructors

def phi(conv, a: int) -> GradedPolynomial:
    return GradedPolynomial.letter(conv, Letter(PHI, 0, a))


def lam(conv, a: int) -> GradedPolynomial:
    return GradedPolynomial.letter(conv, Letter(LAMBDA, 0, a))


def pi(conv, a: int, copy: int = 0) -> GradedPolynomial:
    return GradedPolynomial.letter(conv, Letter(PI, copy, a))


def xi(conv, a: int, copy: int = 0) -> GradedPolynomial:
    return GradedPolynomial.letter(conv, Letter(XI, copy, a))


def hsym(conv, *derivs: int, family: int = H1) -> GradedPolynomial:
    """Classical symbol ∂_{derivs} H of the given family."""
    return GradedPolynomial.letter(conv, Letter(CLASSICAL, family, tuple(sorted(derivs))))


def const(conv, c) -> GradedPolynomial:
    return GradedPolynomial.scalar(conv, c)


# ---------------------------------------------------------------------------
# normal ordering

def _swap_correction(x: Letter, y: Letter):
    """[x, y] for a descent x > y, as (coefficient, replacement letters) or None."""
    if x.rank == LAMBDA:
        if y.rank == PHI:
            return (-ONE_I, ()) if x.index == y.index else None
        if y.rank == CLASSICAL:
            derivs = tuple(sorted(y.index + (x.index,)))
            return (-ONE_I, (Letter(CLASSICAL, y.tag, derivs),))
        return None
    if x.rank == XI and y.rank == PI:
        if x.index == y.index and x.tag == y.tag:
            return (ONE_I, ())
    return None


def _is_sorted(word: tuple) -> bool:
    return all(word[i] <= word[i + 1] for i in range(len(word) - 1))


@lru_cache(maxsize=None)
def _order_word(word: tuple) -> tuple:
    """Canonical expansion of one word as ((word, coeff), ...)."""
    for i in range(len(word) - 1):
        x, y = word[i], word[i + 1]
        if x > y:
            break
    else:
        return ((word, _ONE),)
    out: dict[tuple, object] = {}
    swapped = word[:i] + (y, x) + word[i + 2:]
    for w, c in _order_word(swapped):
        out[w] = out.get(w, _ZERO) + c
    corr = _swap_correction(x, y)
    if corr is not None:
        k, repl = corr
        for w, c in _order_word(word[:i] + repl + word[i + 2:]):
            out[w] = out.get(w, _ZERO) + k * c
    return tuple((w, c) for w, c in out.items() if c)


def normal_order(p: GradedPolynomial) -> GradedPolynomial:
    """Rewrite ``p`` into canonical order using the canonical commutators."""
    out: dict[tuple, object] = {}
    for word, c in p.items():
        if _is_sorted(word):
            out[word] = out.get(word, _ZERO) + c
            continue
        for w, k in _order_word(word):
            out[w] = out.get(w, _ZERO) + c * k
    return GradedPolynomial._raw(p.conv, {w: c for w, c in out.items() if c})


def multiply(p: GradedPolynomial, q: GradedPolynomial) -> GradedPolynomial:
    """Free-algebra product: words are concatenated, nothing is reordered."""
    p._check(q)
    out: dict[tuple, object] = {}
    for w1, c1 in p.items():
        for w2, c2 in q.items():
            w = w1 + w2
            v = out.get(w, _ZERO) + c1 * c2
            if v:
                out[w] = v
            else:
                out.pop(w, None)
    return GradedPolynomial._raw(p.conv, out)


def _letter_commutator(x: Letter, y: Letter):
    """[x, y] for any two letters, as (coefficient, replacement letters) or None."""
    if x > y:
        return _swap_correction(x, y)
    if y > x:
        corr = _swap_correction(y, x)
        if corr is not None:
            return (-corr[0], corr[1])
    return None


def _partner_keys(x: Letter) -> tuple:
    """Index keys of the letters that fail to commute with ``x``."""
    if x.rank == LAMBDA:
        return (("phi", x.index), ("classical",))
    if x.rank == PHI:
        return (("lambda", x.index),)
    if x.rank == CLASSICAL:
        return (("lambda",),)
    if x.rank == XI:
        return (("pi", x.tag, x.index),)
    if x.rank == PI:
        return (("xi", x.tag, x.index),)
    return ()


def _own_keys(x: Letter) -> tuple:
    if x.rank == LAMBDA:
        return (("lambda", x.index), ("lambda",))
    if x.rank == PHI:
        return (("phi", x.index),)
    if x.rank == CLASSICAL:
        return (("classical",),)
    if x.rank == XI:
        return (("xi", x.tag, x.index),)
    return (("pi", x.tag, x.index),)


def commutator_naive(p: GradedPolynomial, q: GradedPolynomial) -> GradedPolynomial:
    """normal_order(pq − qp) by brute-force expansion."""
    return normal_order(multiply(p, q) - multiply(q, p))


def commutator(p: GradedPolynomial, q: GradedPolynomial) -> GradedPolynomial:
    """normal_order(pq − qp).

    Expanded by the Leibniz rule over interacting letter pairs only, which is
    exact in any associative algebra and skips the commuting bulk of pq − qp.
    """
    p._check(q)
    q_words = list(q.items())
    index: dict[tuple, set] = {}
    for k, (w, _) in enumerate(q_words):
        for x in w:
            for key in _own_keys(x):
                index.setdefault(key, set()).add(k)
    raw: dict[tuple, object] = {}
    for wa, ca in p.items():
        cand = set()
        for x in wa:
            for key in _partner_keys(x):
                cand |= index.get(key, set())
        for k in sorted(cand):
            wb, cb = q_words[k]
            coeff = ca * cb
            for i, x in enumerate(wa):
                for j, y in enumerate(wb):
                    corr = _letter_commutator(x, y)
                    if corr is None:
                        continue
                    kk, repl = corr
                    w = wa[:i] + wb[:j] + repl + wb[j + 1:] + wa[i + 1:]
                    raw[w] = raw.get(w, _ZERO) + coeff * kk
    return normal_order(GradedPolynomial._raw(p.conv, {w: c for w, c in raw.items() if c}))


def dagger(p: GradedPolynomial) -> GradedPolynomial:
    """Graded adjoint: reverse words, conjugate scalars; every generator is self-adjoint."""
    out: dict[tuple, object] = {}
    for w, c in p.items():
        rw = w[::-1]
        out[rw] = out.get(rw, _ZERO) + _conj(c)
    return normal_order(GradedPolynomial._raw(p.conv, {w: c for w, c in out.items() if c}))


def equals(p: GradedPolynomial, q) -> bool:
    """Algebraic identity: normal_order(p − q) vanishes."""
    return normal_order(p - q).is_zero


def derivative(p: GradedPolynomial, a: int) -> GradedPolynomial:
    """∂_a of a lambda-free polynomial, computed as i[λ_a, p]."""
    if any(x.rank == LAMBDA for x in p.letters()):
        raise ValueError("derivative is defined for lambda-free polynomials only")
    return ONE_I * commutator(lam(p.conv, a), p)


def drop_family(p: GradedPolynomial, family: int) -> GradedPolynomial:
    """Set every classical symbol of ``family`` to zero."""
    keep = {
        w: c for w, c in p.items()
        if not any(x.rank == CLASSICAL and x.tag == family for x in w)
    }
    return GradedPolynomial._raw(p.conv, keep)


def total(conv: SymplecticConvention, polys: Iterable[GradedPolynomial]) -> GradedPolynomial:
    acc = GradedPolynomial.zero(conv)
    for q in polys:
        acc = acc + q
    return acc


def random_polynomial(conv: SymplecticConvention, rng: np.random.Generator, terms: int = 3,
                      max_len: int = 3, copies: bool = False, classical: bool = True) -> GradedPolynomial:
    """Random unordered polynomial with small Gaussian-integer coefficients.

    Words mix all four generator families and, optionally, first- and
    second-derivative symbols of ``H1``.
    """
    dim = conv.dim
    out = {}
    for _ in range(terms):
        word = []
        for _ in range(int(rng.integers(1, max_len + 1))):
            kind = int(rng.integers(0, 5 if classical else 4))
            a = int(rng.integers(1, dim + 1))
            if kind == 4:
                derivs = tuple(sorted(int(i) for i in rng.integers(1, dim + 1, size=int(rng.integers(1, 3)))))
                word.append(Letter(CLASSICAL, H1, derivs))
                continue
            rank = (PHI, PI, XI, LAMBDA)[kind]
            tag = int(rng.integers(1, dim + 1)) if copies and rank in (PI, XI) else 0
            word.append(Letter(rank, tag, a))
        c = QQ_I(int(rng.integers(-3, 4)), int(rng.integers(-3, 4)))
        if c:
            out[tuple(word)] = c
    return GradedPolynomial(conv, out)

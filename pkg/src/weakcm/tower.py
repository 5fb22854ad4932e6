"""Exact arithmetic in the normal closures of small CM fields.

Four tower families are supported, each presented by structure constants on
a fixed monomial basis over Q:

* quadratic            Q(sqrt(p)),                basis {1, sqrt(p)}
* biquadratic          Q(sqrt(p1), sqrt(p2)),     basis of dimension 4
* cyclic quartic       Q(sqrt(d), xi+),           xi+^2 = p + q*sqrt(d),
                       with dp := p^2 - q^2 d in d*(Q^x)^2 (Galois, Z4)
* quartic closure      degree-8 splitting field of the non-Galois quartic,
                       basis {1, sqrt(d), sqrt(dp), sqrt(d)sqrt(dp),
                              xi+, xi-, sqrt(d)xi+, sqrt(d)xi-},
                       with xi+ * xi- = -sqrt(dp)

All coefficients are ``fractions.Fraction``; there is no floating point.
Galois actions are stored as explicit Q-linear maps on the basis and checked
to be ring automorphisms at construction time.

Sign conventions (recorded, never evaluated numerically): sqrt(p) and xi+
denote the purely imaginary root in the upper half plane, sqrt(d) and
sqrt(dp) the positive real root.
"""

from __future__ import annotations

import math
import os
from fractions import Fraction

from . import linalg
from .errors import (
    DegenerateBiquadratic,
    DivisionByZero,
    FactorizationInconclusive,
    MathError,
    NotSquareFree,
    SingularMatrix,
    SquareClassMismatch,
    TowerMismatch,
    WrongSign,
)

Rational = Fraction

_FACTOR_BOUND_ENV = "WEAKCM_FACTOR_BOUND"
_DEFAULT_FACTOR_BOUND = 100_000


# --------------------------------------------------------------------------
# rationals


def parse_rational(text) -> Fraction:
    """Parse "num/den" (den omitted when 1) into a Fraction."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    return Fraction(str(text).strip())


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def is_rational_square(x: Fraction) -> bool:
    """True iff x is the square of a rational (0 counts)."""
    x = Fraction(x)
    if x < 0:
        return False
    rn = math.isqrt(x.numerator)
    rd = math.isqrt(x.denominator)
    return rn * rn == x.numerator and rd * rd == x.denominator


def rational_sqrt(x: Fraction) -> Fraction:
    """Positive rational square root of a rational square."""
    x = Fraction(x)
    if not is_rational_square(x):
        raise SquareClassMismatch(f"{format_rational(x)} is not a rational square")
    return Fraction(math.isqrt(x.numerator), math.isqrt(x.denominator))


def square_class_test(a: Fraction, d: Fraction) -> bool:
    """True iff a lies in the square class d*(Q^x)^2.

    Equivalently a/d is a positive rational whose lowest-terms numerator and
    denominator are both perfect squares.
    """
    a = Fraction(a)
    d = Fraction(d)
    if d == 0:
        raise DivisionByZero("square class of 0 is undefined")
    if a == 0:
        return False
    return is_rational_square(a / d)


def _factor_bound() -> int:
    raw = os.environ.get(_FACTOR_BOUND_ENV)
    if raw is None:
        return _DEFAULT_FACTOR_BOUND
    return max(2, int(raw))


def is_square_free(n: int, bound: int | None = None) -> bool:
    """Square-free test by trial division up to a configurable bound.

    Raises FactorizationInconclusive when the unfactored remainder is too
    large to decide (remainder exceeding bound^2 that is not itself a
    perfect square may still hide a square factor).
    """
    n = abs(int(n))
    if n == 0:
        return False
    if n <= 3:
        return True
    bound = bound or _factor_bound()
    p = 2
    while p * p <= n and p <= bound:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return False
        p += 1 if p == 2 else 2
    if n == 1 or n <= bound:
        return True
    root = math.isqrt(n)
    if root * root == n:
        return False
    if n <= bound * bound:
        # remainder is prime or a product of two distinct primes > bound
        return True
    raise FactorizationInconclusive(
        f"cannot certify square-freeness of remainder {n}; raise {_FACTOR_BOUND_ENV}"
    )


def squarefree_part(x: Fraction, bound: int | None = None) -> int:
    """Square-free integer s with x in s*(Q^x)^2.  Used for display tags."""
    x = Fraction(x)
    if x == 0:
        return 0
    n = x.numerator * x.denominator
    sign = 1 if n > 0 else -1
    n = abs(n)
    bound = bound or _factor_bound()
    s = 1
    p = 2
    while p * p <= n and p <= bound:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            if e % 2:
                s *= p
        p += 1 if p == 2 else 2
    root = math.isqrt(n)
    if root * root == n:
        return sign * s
    if n <= bound * bound:
        return sign * s * n
    raise FactorizationInconclusive(
        f"cannot extract square-free part of remainder {n}; raise {_FACTOR_BOUND_ENV}"
    )


# --------------------------------------------------------------------------
# tower cases

QUADRATIC = "quadratic"
BIQUADRATIC = "biquadratic"
CYCLIC_QUARTIC = "cyclic-quartic"
QUARTIC_CLOSURE = "nongalois-quartic-closure"

_CASES = (QUADRATIC, BIQUADRATIC, CYCLIC_QUARTIC, QUARTIC_CLOSURE)


class FieldElement:
    """Element of a tower, as a coefficient vector over the monomial basis."""

    __slots__ = ("tower", "coeffs", "_hash")

    def __init__(self, tower: "TowerSpec", coeffs):
        coeffs = tuple(
            c if type(c) is Fraction else Fraction(c) for c in coeffs
        )
        if len(coeffs) != tower.dim:
            raise TowerMismatch("coefficient vector has the wrong length")
        self.tower = tower
        self.coeffs = coeffs
        self._hash = None

    # -- structure

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.tower.rational(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        return self.tower.key == other.tower.key and self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.tower.key, self.coeffs))
        return self._hash

    def _coerce(self, other):
        if isinstance(other, FieldElement):
            if other.tower.key != self.tower.key:
                raise TowerMismatch("elements live in different towers")
            return other
        if isinstance(other, (int, Fraction)):
            return self.tower.rational(other)
        return None

    # -- arithmetic

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.tower, [a + b for a, b in zip(self.coeffs, o.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.tower, [-a for a in self.coeffs])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return FieldElement(self.tower, [a - b for a, b in zip(self.coeffs, o.coeffs)])

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return FieldElement(self.tower, [a * other for a in self.coeffs])
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        table = self.tower._mul_sparse
        dim = self.tower.dim
        out = [Fraction(0)] * dim
        for i, a in enumerate(self.coeffs):
            if not a:
                continue
            row = table[i]
            for j, b in enumerate(o.coeffs):
                if not b:
                    continue
                ab = a * b
                for k, t in row[j]:
                    out[k] += ab * t
        return FieldElement(self.tower, out)

    __rmul__ = __mul__

    def inv(self) -> "FieldElement":
        """Multiplicative inverse via the regular representation over Q."""
        if not self:
            raise DivisionByZero("inverse of zero")
        M = self.tower._regular_matrix(self)
        e1 = [[Fraction(1) if i == 0 else Fraction(0)] for i in range(self.tower.dim)]
        try:
            sol = linalg.solve_columns(M, e1)
        except SingularMatrix as exc:
            raise DivisionByZero("element is a zero divisor") from exc
        if sol is None:
            raise DivisionByZero("element is a zero divisor")
        return FieldElement(self.tower, [row[0] for row in sol])

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise DivisionByZero("division by zero")
            return FieldElement(self.tower, [a / other for a in self.coeffs])
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inv()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inv()

    def __pow__(self, n: int):
        if n == -1:
            return self.inv()
        if n < 0:
            return (self.inv()) ** (-n)
        out = self.tower.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- queries

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise TowerMismatch("element is not rational")
        return self.coeffs[0]

    def serialize(self):
        return [format_rational(c) for c in self.coeffs]

    def __repr__(self):
        return f"FieldElement({self})"

    def __str__(self):
        parts = []
        for c, label in zip(self.coeffs, self.tower.basis):
            if not c:
                continue
            cs = format_rational(c)
            if label == "1":
                parts.append(cs)
            elif c == 1:
                parts.append(label)
            elif c == -1:
                parts.append(f"-{label}")
            else:
                parts.append(f"{cs}*{label}")
        if not parts:
            return "0"
        text = parts[0]
        for p in parts[1:]:
            text += f" + {p}" if not p.startswith("-") else f" - {p[1:]}"
        return text


class GaloisElement:
    """Ring automorphism of a tower, as images of the basis monomials."""

    __slots__ = ("tower", "images", "label")

    def __init__(self, tower: "TowerSpec", images, label: str):
        self.tower = tower
        self.images = tuple(
            img if isinstance(img, FieldElement) else FieldElement(tower, img)
            for img in images
        )
        self.label = label

    def __call__(self, x: FieldElement) -> FieldElement:
        if x.tower.key != self.tower.key:
            raise TowerMismatch("element and automorphism live in different towers")
        out = self.tower.zero()
        for c, img in zip(x.coeffs, self.images):
            if c:
                out = out + img * c
        return out

    def compose(self, other: "GaloisElement") -> "GaloisElement":
        """self after other: (self*other)(x) = self(other(x))."""
        images = [self(img) for img in other.images]
        label = _join_words(self.label, other.label)
        return GaloisElement(self.tower, images, label)

    def __mul__(self, other):
        return self.compose(other)

    def __eq__(self, other):
        if not isinstance(other, GaloisElement):
            return NotImplemented
        return self.tower.key == other.tower.key and all(
            a.coeffs == b.coeffs for a, b in zip(self.images, other.images)
        )

    def __hash__(self):
        return hash((self.tower.key, tuple(img.coeffs for img in self.images)))

    def is_identity(self) -> bool:
        return all(
            img.coeffs == self.tower.gen_index(i).coeffs
            for i, img in enumerate(self.images)
        )

    def is_multiplicative(self) -> bool:
        """Exhaustive check on basis pairs; suffices by bilinearity."""
        for i in range(self.tower.dim):
            bi = self.tower.gen_index(i)
            for j in range(i, self.tower.dim):
                bj = self.tower.gen_index(j)
                if self(bi * bj) != self(bi) * self(bj):
                    return False
        return True

    def action_table(self):
        """Monomial label -> image string, for case reports."""
        return {
            label: str(img) for label, img in zip(self.tower.basis, self.images)
        }

    def __repr__(self):
        return f"GaloisElement({self.label})"


def _join_words(a: str, b: str) -> str:
    if a == "1":
        return b
    if b == "1":
        return a
    return _compress_word(f"{a}*{b}")


def _word_length(label: str) -> int:
    if label == "1":
        return 0
    return sum(
        int(part.split("^")[1]) if "^" in part else 1
        for part in label.split("*")
    )


def _compress_word(word: str) -> str:
    """Run-length encode generator words: s0*s0*s3 -> s0^2*s3."""
    letters = []
    for part in word.split("*"):
        if "^" in part:
            name, k = part.split("^")
            letters.extend([name] * int(k))
        else:
            letters.append(part)
    out = []
    i = 0
    while i < len(letters):
        j = i
        while j < len(letters) and letters[j] == letters[i]:
            j += 1
        out.append(letters[i] if j - i == 1 else f"{letters[i]}^{j - i}")
        i = j
    return "*".join(out)


class TowerSpec:
    """A tower presented by structure constants on a monomial basis."""

    def __init__(self, case, params, radicals, square_rules, basis_monomials,
                 basis_labels, orientation):
        self.case = case
        self.params = {k: Fraction(v) for k, v in params.items()}
        self.key = (case, tuple(sorted(self.params.items())))
        self._radicals = tuple(radicals)
        self._square_rules = square_rules  # radical -> {monomial: Fraction}
        self._monomials = tuple(basis_monomials)
        self._index = {m: i for i, m in enumerate(self._monomials)}
        self.basis = tuple(basis_labels)
        self.dim = len(self._monomials)
        self.orientation = dict(orientation)
        self.mul_table = self._build_mul_table()
        # products of basis monomials have very few terms; keep them sparse
        self._mul_sparse = tuple(
            tuple(
                tuple((k, c) for k, c in enumerate(cell) if c)
                for cell in row
            )
            for row in self.mul_table
        )
        self.generators: dict[str, GaloisElement] = {}
        self._galois_cache = None

    def __eq__(self, other):
        return isinstance(other, TowerSpec) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        ps = ", ".join(f"{k}={format_rational(v)}" for k, v in sorted(self.params.items()))
        return f"TowerSpec({self.case}; {ps})"

    # -- construction helpers

    def _reduce(self, exps: dict, coeff: Fraction, out: dict):
        """Reduce a radical-exponent monomial into basis coordinates."""
        for r in self._radicals:
            if exps.get(r, 0) >= 2:
                rest = dict(exps)
                rest[r] -= 2
                for mono, c in self._square_rules[r].items():
                    merged = dict(rest)
                    for rr in mono:
                        merged[rr] = merged.get(rr, 0) + 1
                    self._reduce(merged, coeff * c, out)
                return
        if self.case == QUARTIC_CLOSURE:
            if exps.get("xp", 0) >= 1 and exps.get("xm", 0) >= 1:
                rest = dict(exps)
                rest["xp"] -= 1
                rest["xm"] -= 1
                rest["sdp"] = rest.get("sdp", 0) + 1
                self._reduce(rest, -coeff, out)
                return
            if exps.get("sdp", 0) >= 1 and (exps.get("xp", 0) or exps.get("xm", 0)):
                rest = dict(exps)
                rest["sdp"] -= 1
                rest["xp"] = rest.get("xp", 0) + 1
                rest["xm"] = rest.get("xm", 0) + 1
                self._reduce(rest, -coeff, out)
                return
        mono = tuple(r for r in self._radicals if exps.get(r, 0))
        out[mono] = out.get(mono, Fraction(0)) + coeff

    def _build_mul_table(self):
        table = []
        for mi in self._monomials:
            row = []
            for mj in self._monomials:
                exps: dict = {}
                for r in mi:
                    exps[r] = exps.get(r, 0) + 1
                for r in mj:
                    exps[r] = exps.get(r, 0) + 1
                out: dict = {}
                self._reduce(exps, Fraction(1), out)
                coeffs = [Fraction(0)] * len(self._monomials)
                for mono, c in out.items():
                    coeffs[self._index[mono]] += c
                row.append(tuple(coeffs))
            table.append(tuple(row))
        return tuple(table)

    def _regular_matrix(self, x: FieldElement):
        """Columns are the coordinates of x * basis_j."""
        cols = [(x * self.gen_index(j)).coeffs for j in range(self.dim)]
        return [[cols[j][i] for j in range(self.dim)] for i in range(self.dim)]

    # -- element constructors

    def zero(self) -> FieldElement:
        return FieldElement(self, [Fraction(0)] * self.dim)

    def one(self) -> FieldElement:
        return self.rational(1)

    def rational(self, c) -> FieldElement:
        coeffs = [Fraction(0)] * self.dim
        coeffs[0] = Fraction(c)
        return FieldElement(self, coeffs)

    def element(self, coeffs) -> FieldElement:
        return FieldElement(self, coeffs)

    def gen_index(self, i: int) -> FieldElement:
        coeffs = [Fraction(0)] * self.dim
        coeffs[i] = Fraction(1)
        return FieldElement(self, coeffs)

    def gen(self, label: str) -> FieldElement:
        return self.gen_index(self.basis.index(label))

    def _monomial_map(self, signed_images: dict, label: str) -> GaloisElement:
        """Automorphism defined by radical -> (sign, radical)."""
        images = []
        for mono in self._monomials:
            sign = Fraction(1)
            target: dict = {}
            for r in mono:
                s, rr = signed_images[r]
                sign *= s
                target[rr] = target.get(rr, 0) + 1
            out: dict = {}
            self._reduce(target, sign, out)
            coeffs = [Fraction(0)] * self.dim
            for m, c in out.items():
                coeffs[self._index[m]] += c
            images.append(coeffs)
        return GaloisElement(self, images, label)

    # -- Galois machinery

    @property
    def conjugation(self) -> GaloisElement:
        return self.generators["rho"]

    def galois_elements(self):
        """The full automorphism group, closed over the named generators.

        Deterministic order: identity first, then by (word length, word).
        """
        if self._galois_cache is not None:
            return self._galois_cache
        identity = GaloisElement(
            self, [self.gen_index(i).coeffs for i in range(self.dim)], "1"
        )
        seen = {identity: identity}
        frontier = [identity]
        gens = [(name, g) for name, g in sorted(self.generators.items())
                if name != "rho" or self.case == QUADRATIC]
        while frontier:
            new = []
            for h in frontier:
                for name, g in gens:
                    prod = g.compose(h)
                    if prod not in seen:
                        seen[prod] = prod
                        new.append(prod)
            frontier = new
        elems = sorted(seen, key=lambda g: (_word_length(g.label), g.label))
        self._galois_cache = tuple(elems)
        return self._galois_cache


# --------------------------------------------------------------------------
# the four constructors


def quadratic_tower(p) -> TowerSpec:
    p = parse_rational(p)
    if p >= 0:
        raise WrongSign("quadratic case needs p < 0")
    tower = TowerSpec(
        QUADRATIC,
        {"p": p},
        radicals=("sp",),
        square_rules={"sp": {(): p}},
        basis_monomials=[(), ("sp",)],
        basis_labels=["1", "sqrt(p)"],
        orientation={"sqrt(p)": "upper-half-plane"},
    )
    rho = tower._monomial_map({"sp": (Fraction(-1), "sp")}, "rho")
    tower.generators = {"rho": rho}
    _check_generators(tower)
    return tower


def biquadratic_tower(p1, p2) -> TowerSpec:
    p1, p2 = parse_rational(p1), parse_rational(p2)
    if p1 >= 0 or p2 >= 0:
        raise WrongSign("biquadratic case needs p1 < 0 and p2 < 0")
    if is_rational_square(p1 / p2):
        raise DegenerateBiquadratic("p1/p2 is a rational square, fields coincide")
    tower = TowerSpec(
        BIQUADRATIC,
        {"p1": p1, "p2": p2},
        radicals=("s1", "s2"),
        square_rules={"s1": {(): p1}, "s2": {(): p2}},
        basis_monomials=[(), ("s1",), ("s2",), ("s1", "s2")],
        basis_labels=["1", "sqrt(p1)", "sqrt(p2)", "sqrt(p1)*sqrt(p2)"],
        orientation={"sqrt(p1)": "upper-half-plane", "sqrt(p2)": "upper-half-plane"},
    )
    s1 = tower._monomial_map(
        {"s1": (Fraction(-1), "s1"), "s2": (Fraction(1), "s2")}, "s1"
    )
    s2 = tower._monomial_map(
        {"s1": (Fraction(1), "s1"), "s2": (Fraction(-1), "s2")}, "s2"
    )
    tower.generators = {"s1": s1, "s2": s2, "rho": s1.compose(s2)}
    _check_generators(tower)
    return tower


def _check_quartic_params(d, p, q):
    d = parse_rational(d)
    if d.denominator != 1 or d <= 1:
        raise NotSquareFree("d must be a square-free integer > 1")
    if not is_square_free(d.numerator):
        raise NotSquareFree(f"d = {d.numerator} is not square-free")
    p, q = parse_rational(p), parse_rational(q)
    if p >= 0:
        raise WrongSign("quartic cases need p < 0")
    dprime = p * p - q * q * d
    if dprime <= 0:
        raise WrongSign("p^2 - q^2 d must be positive for a CM field")
    return d, p, q, dprime


def cyclic_quartic_tower(d, p, q) -> TowerSpec:
    """Case with cyclic Galois group Z4; needs dp = p^2 - q^2 d in d*(Q^x)^2."""
    d, p, q, dprime = _check_quartic_params(d, p, q)
    if not square_class_test(dprime, d):
        raise SquareClassMismatch(
            f"dp = {format_rational(dprime)} is not in {format_rational(d)}*(Q^x)^2"
        )
    e = rational_sqrt(dprime / d)  # sqrt(dp) = e*sqrt(d), e > 0
    tower = TowerSpec(
        CYCLIC_QUARTIC,
        {"d": d, "p": p, "q": q},
        radicals=("sd", "xp"),
        square_rules={"sd": {(): d}, "xp": {(): p, ("sd",): q}},
        basis_monomials=[(), ("sd",), ("xp",), ("sd", "xp")],
        basis_labels=["1", "sqrt(d)", "xi+", "sqrt(d)*xi+"],
        orientation={"sqrt(d)": "positive", "xi+": "upper-half-plane",
                     "sqrt(dp)": "positive"},
    )
    # sigma0: sqrt(d) -> -sqrt(d), xi+ -> xi- = -sqrt(dp)/xi+
    #   xi- = (q/e)*xi+ - (p/(d*e))*sqrt(d)*xi+
    zero = Fraction(0)
    xi_minus = (zero, zero, q / e, -p / (d * e))
    sd_xi_minus = (zero, zero, p / e, -q / e)  # -sqrt(d)*xi-
    s0 = GaloisElement(
        tower,
        [
            (Fraction(1), zero, zero, zero),
            (zero, Fraction(-1), zero, zero),
            xi_minus,
            sd_xi_minus,
        ],
        "s0",
    )
    tower.generators = {"s0": s0, "rho": s0.compose(s0)}
    tower.generators["rho"].label = "s0^2"
    _check_generators(tower)
    return tower


def quartic_closure_tower(d, p, q) -> TowerSpec:
    """Degree-8 normal closure for the non-Galois case (group Z4 x| Z2)."""
    d, p, q, dprime = _check_quartic_params(d, p, q)
    if square_class_test(dprime, d):
        raise SquareClassMismatch(
            f"dp = {format_rational(dprime)} lies in d*(Q^x)^2: cyclic case, not closure"
        )
    if is_rational_square(dprime):
        raise SquareClassMismatch(
            f"dp = {format_rational(dprime)} is a rational square: field is biquadratic"
        )
    tower = TowerSpec(
        QUARTIC_CLOSURE,
        {"d": d, "p": p, "q": q},
        radicals=("sd", "sdp", "xp", "xm"),
        square_rules={
            "sd": {(): d},
            "sdp": {(): dprime},
            "xp": {(): p, ("sd",): q},
            "xm": {(): p, ("sd",): -q},
        },
        basis_monomials=[
            (), ("sd",), ("sdp",), ("sd", "sdp"),
            ("xp",), ("xm",), ("sd", "xp"), ("sd", "xm"),
        ],
        basis_labels=[
            "1", "sqrt(d)", "sqrt(dp)", "sqrt(d)*sqrt(dp)",
            "xi+", "xi-", "sqrt(d)*xi+", "sqrt(d)*xi-",
        ],
        orientation={"sqrt(d)": "positive", "sqrt(dp)": "positive",
                     "xi+": "upper-half-plane"},
    )
    one, mone = Fraction(1), Fraction(-1)
    s0 = tower._monomial_map(
        {"sd": (mone, "sd"), "sdp": (mone, "sdp"),
         "xp": (one, "xm"), "xm": (mone, "xp")},
        "s0",
    )
    s3 = tower._monomial_map(
        {"sd": (mone, "sd"), "sdp": (one, "sdp"),
         "xp": (one, "xm"), "xm": (one, "xp")},
        "s3",
    )
    tower.generators = {"s0": s0, "s3": s3, "rho": s0.compose(s0)}
    tower.generators["rho"].label = "s0^2"
    _check_generators(tower)
    return tower


def _check_generators(tower: TowerSpec):
    for name, g in tower.generators.items():
        if not g.is_multiplicative():
            raise MathError(
                f"generator {name} is not a ring automorphism; inconsistent parameters"
            )


def build_tower(spec: dict) -> TowerSpec:
    """Build a tower from a case descriptor, e.g. from a parsed document."""
    case = spec.get("case")
    if case in (QUADRATIC, "Quadratic", "deg2"):
        return quadratic_tower(spec["p"])
    if case in (BIQUADRATIC, "BiQuadratic", "A"):
        return biquadratic_tower(spec["p1"], spec["p2"])
    if case in (CYCLIC_QUARTIC, "CyclicQuartic", "B"):
        return cyclic_quartic_tower(spec["d"], spec["p"], spec["q"])
    if case in (QUARTIC_CLOSURE, "NonGaloisQuarticClosure", "C"):
        return quartic_closure_tower(spec["d"], spec["p"], spec["q"])
    raise SquareClassMismatch(f"unknown tower case {case!r}")


def serialize_tower(tower: TowerSpec) -> dict:
    return {
        "case": tower.case,
        "params": {k: format_rational(v) for k, v in sorted(tower.params.items())},
    }


# --------------------------------------------------------------------------
# queries used across modules


def min_poly_degree(x: FieldElement) -> int:
    """Degree of x over Q, by exact linear dependence of 1, x, x^2, ..."""
    rows = []
    power = x.tower.one()
    for k in range(1, x.tower.dim + 2):
        rows.append(list(power.coeffs))
        if linalg.row_rank(rows) < k:
            return k - 1
        power = power * x
    raise MathError("powers never became dependent; corrupt tower")


def generated_subalgebra(tower: TowerSpec, elements) -> list:
    """Echelon basis of the unital Q-subalgebra generated by the elements.

    The span is closed under multiplication step by step; in a field this
    is the subfield generated by the elements.
    """
    rows = [list(tower.one().coeffs)]
    for x in elements:
        rows.append(list(x.coeffs))
    basis = _echelon(rows)
    while True:
        new_rows = [list(r) for r in basis]
        for a in basis:
            ea = tower.element(a)
            for b in basis:
                new_rows.append(list((ea * tower.element(b)).coeffs))
        new_basis = _echelon(new_rows)
        if len(new_basis) == len(basis):
            return new_basis
        basis = new_basis


def _echelon(rows):
    M = [list(r) for r in rows]
    ncols = len(M[0]) if M else 0
    out = []
    rank = 0
    for col in range(ncols):
        pivot = None
        for r in range(rank, len(M)):
            if M[r][col]:
                pivot = r
                break
        if pivot is None:
            continue
        M[rank], M[pivot] = M[pivot], M[rank]
        piv = M[rank][col]
        M[rank] = [x / piv for x in M[rank]]
        for r in range(len(M)):
            if r != rank and M[r][col]:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[rank])]
        rank += 1
    return [tuple(r) for r in M[:rank]]


def subspace_coordinates(basis_elements, x: FieldElement):
    """Coordinates of x in the Q-span of the given elements, or None."""
    if not basis_elements:
        return None
    A = [[b.coeffs[i] for b in basis_elements] for i in range(x.tower.dim)]
    sol = linalg.solve_columns(A, [[c] for c in x.coeffs])
    if sol is None:
        return None
    return [row[0] for row in sol]

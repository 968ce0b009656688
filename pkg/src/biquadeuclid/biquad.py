"""Real biquadratic fields K = Q(sqrt m1, sqrt m2) and the triples (q, k, r) behind K = Q(sqrt q, sqrt kr)."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import combinations, product
from math import gcd, lcm, prod
from typing import Iterable, Optional, Sequence

import gmpy2

from .arith import is_prime, is_squarefree
from .quadfield import DEFAULT_BITS, PrecisionError, QuadField, fundamental_discriminant, quad_field

EXCLUDED_PRIMES = frozenset({2, 3, 5, 7, 17})
SQUARE_TEST_START_BITS = 256
SQUARE_TEST_MAX_BITS = 4096


class HypothesisError(ValueError):
    """A construction was requested outside the hypotheses it is valid under."""


@dataclass(frozen=True)
class PrimeTriple:
    q: int
    k: int
    r: int

    def __post_init__(self):
        for p in (self.q, self.k, self.r):
            if not is_prime(p):
                raise ValueError(f"{p} is not prime")
        if len({self.q, self.k, self.r}) != 3:
            raise ValueError("q, k, r must be distinct")

    @property
    def classes_mod4(self) -> tuple[int, int, int]:
        return self.q % 4, self.k % 4, self.r % 4

    @property
    def eligible(self) -> bool:
        """k or r = 1 mod 4, and no prime from {2, 3, 5, 7, 17}."""
        if EXCLUDED_PRIMES & {self.q, self.k, self.r}:
            return False
        return self.k % 4 == 1 or self.r % 4 == 1

    def __str__(self) -> str:
        return f"({self.q},{self.k},{self.r})"


# -- exact arithmetic in K ---------------------------------------------------


@dataclass(frozen=True)
class KElement:
    """c0 + c1*sqrt(m1) + c2*sqrt(m2) + c3*sqrt(m3), m3 = m1*m2/g^2, g = gcd(m1, m2)."""

    m1: int
    m2: int
    coeffs: tuple[Fraction, Fraction, Fraction, Fraction]

    @property
    def g(self) -> int:
        return gcd(self.m1, self.m2)

    @property
    def m3(self) -> int:
        return self.m1 * self.m2 // self.g**2

    @classmethod
    def from_coeffs(cls, m1: int, m2: int, coeffs: Iterable) -> "KElement":
        return cls(m1, m2, tuple(Fraction(c) for c in coeffs))

    def __mul__(self, other: "KElement") -> "KElement":
        if (self.m1, self.m2) != (other.m1, other.m2):
            raise ValueError("elements of different fields")
        a0, a1, a2, a3 = self.coeffs
        b0, b1, b2, b3 = other.coeffs
        m1, m2, m3, g = self.m1, self.m2, self.m3, self.g
        # e1*e2 = g*e3, e1*e3 = (m1/g)*e2, e2*e3 = (m2/g)*e1
        n1, n2 = m1 // g, m2 // g
        c0 = a0 * b0 + m1 * a1 * b1 + m2 * a2 * b2 + m3 * a3 * b3
        c1 = a0 * b1 + a1 * b0 + n2 * (a2 * b3 + a3 * b2)
        c2 = a0 * b2 + a2 * b0 + n1 * (a1 * b3 + a3 * b1)
        c3 = a0 * b3 + a3 * b0 + g * (a1 * b2 + a2 * b1)
        return KElement(m1, m2, (c0, c1, c2, c3))

    def __pow__(self, n: int) -> "KElement":
        out = KElement.from_coeffs(self.m1, self.m2, (1, 0, 0, 0))
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def embeddings(self, bits: int) -> list[gmpy2.mpfr]:
        """Images under (s1, s2) in ((1,1), (1,-1), (-1,1), (-1,-1)); sqrt m3 maps to s1*s2*sqrt m3."""
        with gmpy2.context(gmpy2.get_context(), precision=bits):
            r1, r2, r3 = (gmpy2.sqrt(m) for m in (self.m1, self.m2, self.m3))
            c0, c1, c2, c3 = (gmpy2.mpq(c.numerator, c.denominator) for c in self.coeffs)
            return [c0 + s1 * c1 * r1 + s2 * c2 * r2 + s1 * s2 * c3 * r3 for s1, s2 in _SIGNS]


_SIGNS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def subfield_generators(m1: int, m2: int) -> tuple[int, int, int]:
    return m1, m2, m1 * m2 // gcd(m1, m2) ** 2


def subfields(m1: int, m2: int, bits: int = DEFAULT_BITS) -> tuple[QuadField, QuadField, QuadField]:
    """The three quadratic subfields Q(sqrt m1), Q(sqrt m2), Q(sqrt m3) of Q(sqrt m1, sqrt m2)."""
    if m1 == m2:
        raise ValueError("degenerate field: m1 == m2")
    for m in (m1, m2):
        if m <= 1 or not is_squarefree(m):
            raise ValueError(f"not squarefree: {m}")
    return tuple(quad_field(m, bits) for m in subfield_generators(m1, m2))


def _unit_element(m1: int, m2: int, slot: int, qf: QuadField) -> KElement:
    u = qf.unit
    den = u.denominator
    coeffs = [Fraction(u.x, den), Fraction(0), Fraction(0), Fraction(0)]
    coeffs[slot + 1] = Fraction(u.y, den)
    return KElement(m1, m2, tuple(coeffs))


def _unit_embeddings(qf: QuadField, slot: int, bits: int) -> list[gmpy2.mpfr]:
    """Images of a subfield unit under the four embeddings of K."""
    eps, conj = qf.unit.value(bits), qf.unit.conjugate_value(bits)
    out = []
    for s1, s2 in _SIGNS:
        s = (s1, s2, s1 * s2)[slot]
        out.append(eps if s == 1 else conj)
    return out


@dataclass(frozen=True)
class BiquadField:
    """K = Q(sqrt m1, sqrt m2) with its subfield data; index, class number and conductor are lazy."""

    m1: int
    m2: int
    sub1: QuadField
    sub2: QuadField
    sub3: QuadField
    hcf_generators: Optional[tuple[int, ...]] = field(default=None, compare=False)

    @property
    def m3(self) -> int:
        return self.sub3.d

    @property
    def subs(self) -> tuple[QuadField, QuadField, QuadField]:
        return self.sub1, self.sub2, self.sub3

    @cached_property
    def unit_index(self) -> int:
        # independent of the precision the subfields were built at
        key = (self.m1, self.m2)
        if key not in _UNIT_INDEX_CACHE:
            _UNIT_INDEX_CACHE[key] = unit_index(self)
        return _UNIT_INDEX_CACHE[key]

    @cached_property
    def h_K(self) -> int:
        num = self.unit_index * self.sub1.h * self.sub2.h * self.sub3.h
        if num % 4:
            raise ArithmeticError(f"unit index inconsistent: Q*h1*h2*h3 = {num} not divisible by 4")
        return num // 4

    @cached_property
    def conductor(self) -> int:
        return conductor((self.m1, self.m2))


_UNIT_INDEX_CACHE: dict[tuple[int, int], int] = {}


@lru_cache(maxsize=None)
def biquad_field(m1: int, m2: int, bits: int = DEFAULT_BITS) -> BiquadField:
    return BiquadField(m1, m2, *subfields(m1, m2, bits))


def field_of_triple(triple: PrimeTriple, bits: int = DEFAULT_BITS) -> BiquadField:
    return biquad_field(triple.q, triple.k * triple.r, bits)


def _needed_bits(roots: Sequence[gmpy2.mpfr]) -> int:
    # |4*c_j| <= 4 * max |embedding of the root|; keep 64 guard bits below the unit place
    top = max(abs(v) for v in roots)
    return int(gmpy2.log2(top)) + 66 if top > 1 else 66


def is_square_in_K(
    fld: BiquadField,
    exponents: Sequence[int],
    max_bits: int = SQUARE_TEST_MAX_BITS,
) -> Optional[KElement]:
    """Square root in K of eps1^a * eps2^b * eps3^c, or None if it is not a square.

    The root's four embeddings are +-sqrt of the product's embeddings; each of
    the 8 sign patterns (up to global sign) gives candidate coordinates, which
    are rounded to quarter-integers and accepted only if they square exactly.
    Working precision starts at 256 bits and doubles until it covers the size
    of the coordinates; past ``max_bits`` this raises :class:`PrecisionError`.
    """
    exponents = tuple(exponents)
    if len(exponents) != 3 or any(e < 0 for e in exponents) or not any(exponents):
        raise ValueError("exponents must be three non-negative integers, not all zero")
    m1, m2 = fld.m1, fld.m2
    target = KElement.from_coeffs(m1, m2, (1, 0, 0, 0))
    for slot, (qf, e) in enumerate(zip(fld.subs, exponents)):
        if e:
            target = target * _unit_element(m1, m2, slot, qf) ** e

    bits = SQUARE_TEST_START_BITS
    while True:
        with gmpy2.context(gmpy2.get_context(), precision=bits):
            images = [gmpy2.mpfr(1)] * 4
            for slot, (qf, e) in enumerate(zip(fld.subs, exponents)):
                if e:
                    images = [x * y**e for x, y in zip(images, _unit_embeddings(qf, slot, bits))]
            if any(v <= 0 for v in images):
                return None
            roots = [gmpy2.sqrt(v) for v in images]
            needed = _needed_bits(roots)
            if needed > bits:
                if bits >= max_bits:
                    raise PrecisionError(f"undecided at max precision ({max_bits} bits) for exponents {exponents}")
                bits *= 2
                continue
            rads = [gmpy2.mpfr(1)] + [gmpy2.sqrt(m) for m in (fld.m1, fld.m2, fld.m3)]
            for t2, t3, t4 in product((1, -1), repeat=3):
                eta = [roots[0], t2 * roots[1], t3 * roots[2], t4 * roots[3]]
                quads = []
                for j, rad in enumerate(rads):
                    acc = gmpy2.mpfr(0)
                    for (s1, s2), v in zip(_SIGNS, eta):
                        acc += (1, s1, s2, s1 * s2)[j] * v
                    quads.append(acc / rad)  # = 4 * c_j
                rounded = [int(gmpy2.rint(x)) for x in quads]
                if any(abs(x - n) > 0.01 for x, n in zip(quads, rounded)):
                    continue
                cand = KElement.from_coeffs(m1, m2, (Fraction(n, 4) for n in rounded))
                if cand * cand == target:
                    return cand
            return None


def unit_index(fld: BiquadField) -> int:
    """[E_K : <-1, eps1, eps2, eps3>], from which of the 7 products eps^v are squares in K.

    Squaring embeds E_K/<-1,eps_i> into the exponent vectors v whose product
    is a square; the image is a subgroup of F_2^3, so the index is 1 + #squares.
    """
    squares = [v for v in product((0, 1), repeat=3) if any(v) and is_square_in_K(fld, v) is not None]
    index = 1 + len(squares)
    if index not in (1, 2, 4, 8):
        raise ArithmeticError(f"unit index inconsistent: {len(squares)} square products")
    sq = set(squares) | {(0, 0, 0)}
    if any(tuple((a + b) % 2 for a, b in zip(u, v)) not in sq for u in sq for v in sq):
        raise ArithmeticError("unit index inconsistent: square products do not form a group")
    return index


def class_number_biquad(q: int, k: int, r: int, bits: int = DEFAULT_BITS) -> int:
    """h_K for K = Q(sqrt q, sqrt kr), by Kubota's formula 4*h_K = Q*h1*h2*h3."""
    return field_of_triple(PrimeTriple(q, k, r), bits).h_K


def _squarefree_product(ms: Iterable[int]) -> int:
    out = 1
    for m in ms:
        out = out * m // gcd(out, m) ** 2
    return out


def quadratic_subfield_generators(generators: Sequence[int]) -> list[int]:
    """Squarefree d of every quadratic subfield of Q(sqrt g1, ..., sqrt gn), ascending."""
    ds = set()
    for n in range(1, len(generators) + 1):
        for subset in combinations(generators, n):
            d = _squarefree_product(subset)
            if d != 1:
                ds.add(d)
    return sorted(ds)


def conductor(generators: Sequence[int]) -> int:
    """Conductor of the real multiquadratic field Q(sqrt g1, ..., sqrt gn).

    The lcm of the quadratic subfields' discriminants; for Q(sqrt q, sqrt kr)
    with any generator = 3 mod 4 this is 4qkr.
    """
    return lcm(*(fundamental_discriminant(d) for d in quadratic_subfield_generators(generators)))


@dataclass(frozen=True)
class HilbertClassField:
    generators: tuple[int, ...]
    conductor: int
    quadratic_subfields: tuple[int, ...]
    degree_over_K: int = 2


def hilbert_class_field(q: int, k: int, r: int, bits: int = DEFAULT_BITS) -> HilbertClassField:
    """H(K) = Q(sqrt q, sqrt k, sqrt r), only under the theorem's hypotheses (eligible, h_K = 2)."""
    triple = PrimeTriple(q, k, r)
    if not triple.eligible:
        raise HypothesisError(f"triple {triple} is not eligible")
    h = class_number_biquad(q, k, r, bits)
    if h != 2:
        raise HypothesisError(f"hypothesis h_K = 2 fails: h_K = {h}")
    gens = (q, k, r)
    return HilbertClassField(gens, conductor(gens), tuple(quadratic_subfield_generators(gens)))


@dataclass(frozen=True)
class RamificationEvidence:
    p: int
    auxiliary: Optional[int]  # d of a subfield Q(sqrt d) of L outside K with p unramified
    discriminant: Optional[int]

    @property
    def ok(self) -> bool:
        return self.auxiliary is not None


@dataclass(frozen=True)
class UnramifiedReport:
    triple: PrimeTriple
    evidence: tuple[RamificationEvidence, ...]

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.evidence)


def verify_unramified(q: int, k: int, r: int) -> UnramifiedReport:
    """For p in {2, q, k, r}: find Q(sqrt d) in L = Q(sqrt q, sqrt k, sqrt r), not in K, with p unramified.

    L = K(sqrt d) for any such d, so primes of K above p are then unramified in L.
    """
    triple = PrimeTriple(q, k, r)
    if not triple.eligible:
        raise HypothesisError(f"triple {triple} is not eligible")
    in_K = set(quadratic_subfield_generators((q, k * r)))
    outside = [d for d in quadratic_subfield_generators((q, k, r)) if d not in in_K]
    evidence = []
    for p in (2, q, k, r):
        found = None
        for d in outside:
            disc = fundamental_discriminant(d)
            if disc % p:
                found = (d, disc)
                break
        evidence.append(RamificationEvidence(p, *(found or (None, None))))
    return UnramifiedReport(triple, tuple(evidence))

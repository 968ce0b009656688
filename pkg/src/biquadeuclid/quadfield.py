"""Real quadratic fields Q(sqrt d): discriminant, fundamental unit, regulator, class number.

The class number comes from Dirichlet's analytic formula, evaluated in
multiprecision floating point, and is cross-checked against an exact count of
reduced indefinite binary quadratic form cycles (:func:`class_number_forms_oracle`).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import isqrt

import gmpy2
import numpy as np

from .arith import factorize, is_squarefree

DEFAULT_BITS = 128
MAX_BITS = 1024
# Largest tolerated distance between h*R-ratio and the nearest integer.
ROUNDING_TOLERANCE = 0.05
GUARD_BITS = 64


class PrecisionError(ArithmeticError):
    """Raised when a numeric stage cannot decide at its precision cap."""


@dataclass(frozen=True)
class FundamentalUnit:
    """The unit (x + y*sqrt(d)) / 2 if ``halved`` else x + y*sqrt(d)."""

    x: int
    y: int
    halved: bool
    d: int

    @property
    def denominator(self) -> int:
        return 2 if self.halved else 1

    @property
    def norm(self) -> int:
        """Exact norm, +1 or -1."""
        n = self.x * self.x - self.d * self.y * self.y
        return n // 4 if self.halved else n

    def value(self, bits: int = DEFAULT_BITS) -> gmpy2.mpfr:
        with gmpy2.context(gmpy2.get_context(), precision=bits):
            return (self.x + self.y * gmpy2.sqrt(self.d)) / self.denominator

    def conjugate_value(self, bits: int = DEFAULT_BITS) -> gmpy2.mpfr:
        # norm / eps avoids the cancellation in x - y*sqrt(d)
        with gmpy2.context(gmpy2.get_context(), precision=bits):
            return self.norm / self.value(bits)


@dataclass(frozen=True)
class QuadField:
    d: int
    D: int
    unit: FundamentalUnit
    regulator: gmpy2.mpfr
    h: int


def fundamental_discriminant(d: int) -> int:
    if d <= 1 or not is_squarefree(d):
        raise ValueError(f"not squarefree: {d}")
    return d if d % 4 == 1 else 4 * d


def _check_d(d: int) -> None:
    if d <= 1:
        raise ValueError(f"d must exceed 1, got {d}")
    if not is_squarefree(d):
        raise ValueError(f"not squarefree: {d}")


def continued_fraction_period(d: int) -> tuple[int, int, list[int]]:
    """Partial quotients of one period of the reduced generator of O_K.

    The generator is alpha = (P0 + sqrt d)/Q0 with (P0, Q0) = (b, 2), b the
    largest odd integer below sqrt d, when d = 1 mod 4, and (floor sqrt d, 1)
    otherwise. alpha is reduced, so its expansion is purely periodic and every
    Q_i stays positive; only integer recurrences are used.
    """
    s = isqrt(d)
    if d % 4 == 1:
        p0, q0 = (s if s % 2 else s - 1), 2
    else:
        p0, q0 = s, 1
    p, q = p0, q0
    quotients = []
    while True:
        a = (p + s) // q
        quotients.append(a)
        p = a * q - p
        q = (d - p * p) // q
        if p == p0 and q == q0:
            return p0, q0, quotients


@lru_cache(maxsize=None)
def fundamental_unit(d: int) -> FundamentalUnit:
    """Smallest unit > 1 of the ring of integers of Q(sqrt d).

    If alpha has purely periodic expansion of length n with convergent
    denominators q_i, then alpha is fixed by [[p_{n-1}, p_{n-2}], [q_{n-1}, q_{n-2}]]
    and the eigenvalue q_{n-1}*alpha + q_{n-2} is the fundamental unit of the
    multiplier ring Z + Z*alpha = O_K.
    """
    _check_d(d)
    p0, q0, quotients = continued_fraction_period(d)
    q_prev, q_cur = 1, 0  # q_{-2}, q_{-1}
    for a in quotients:
        q_prev, q_cur = q_cur, a * q_cur + q_prev
    # eps = q_cur * (p0 + sqrt d)/q0 + q_prev
    x, y = q_cur * p0 + q0 * q_prev, q_cur
    if q0 == 2 and x % 2 == 0 and y % 2 == 0:
        x, y, q0 = x // 2, y // 2, 1
    unit = FundamentalUnit(x, y, q0 == 2, d)
    if unit.norm not in (1, -1):
        raise AssertionError(f"unit norm check failed for d={d}")
    return unit


def regulator(unit: FundamentalUnit, bits: int = DEFAULT_BITS) -> gmpy2.mpfr:
    with gmpy2.context(gmpy2.get_context(), precision=bits):
        return gmpy2.log(unit.value(bits))


def character_table(D: int) -> np.ndarray:
    """chi_D(a) for a in [0, D), as an int8 array.

    Uses the factorisation of a fundamental discriminant into prime
    discriminants: chi_D = prod chi_{p*} * (2-part), with chi_{p*}(a) the
    Legendre symbol (a/p) and the 2-part one of chi_{-4}, chi_8, chi_{-8}.
    """
    a = np.arange(D, dtype=np.int64)
    chi = np.ones(D, dtype=np.int8)
    odd = D
    while odd % 2 == 0:
        odd //= 2
    sign = 1
    for p in factorize(odd):
        leg = -np.ones(p, dtype=np.int8)
        leg[(np.arange(1, p, dtype=np.int64) ** 2) % p] = 1
        leg[0] = 0
        chi *= leg[a % p]
        if p % 4 == 3:
            sign = -sign
    if D % 4 == 0:
        # 2-part disc = D / prod(p*) is one of -4, 8, -8
        two = D // odd * sign
        r = a % 8
        chi4 = np.where(r % 4 == 1, 1, -1)
        chi8 = np.where((r == 1) | (r == 7), 1, -1)
        part = {-4: chi4, 8: chi8, -8: chi4 * chi8}[two]
        chi *= part.astype(np.int8)
        chi[a % 2 == 0] = 0
    return chi


def dirichlet_class_number(D: int, unit: FundamentalUnit, bits: int = DEFAULT_BITS) -> tuple[int, float]:
    """Class number from h = -(1/R) * sum_{0<a<D/2} chi_D(a) ln sin(pi a/D).

    Returns (h, rounding residue). ``bits <= 53`` selects a vectorised float64
    evaluation; otherwise the sum runs in MPFR at ``bits`` of precision.
    Raises :class:`PrecisionError` when the residue exceeds ``ROUNDING_TOLERANCE``.
    """
    chi = character_table(D)[: (D + 1) // 2]
    if bits <= 53:
        plus = np.flatnonzero(chi == 1)
        minus = np.flatnonzero(chi == -1)
        log_ratio = float(np.log(np.sin(np.pi * plus / D)).sum() - np.log(np.sin(np.pi * minus / D)).sum())
        ratio = -log_ratio / float(regulator(unit, 64))
    else:
        # sin(a*x) by the recurrence s_{a+1} = 2cos(x) s_a - s_{a-1}; its rounding
        # error grows like D^2 * 2^-prec, so GUARD_BITS extra bits absorb it
        signs = chi.tolist()
        with gmpy2.context(gmpy2.get_context(), precision=bits + GUARD_BITS):
            step = gmpy2.const_pi() / D
            twice_cos = 2 * gmpy2.cos(step)
            prev, cur = gmpy2.mpfr(0), gmpy2.sin(step)
            num, den = gmpy2.mpfr(1), gmpy2.mpfr(1)
            for a in range(1, len(signs)):
                if signs[a] == 1:
                    num *= cur
                elif signs[a] == -1:
                    den *= cur
                prev, cur = cur, twice_cos * cur - prev
            ratio = -(gmpy2.log(num) - gmpy2.log(den)) / regulator(unit, bits + GUARD_BITS)
    h = int(gmpy2.rint(ratio)) if bits > 53 else round(ratio)
    residue = abs(float(ratio - h))
    if residue > ROUNDING_TOLERANCE or h < 1:
        raise PrecisionError(f"insufficient precision: D={D} bits={bits} residue={residue:.3g}")
    return h, residue


def class_number_quad(d: int, bits: int = DEFAULT_BITS, max_bits: int = MAX_BITS) -> int:
    """Class number of Q(sqrt d), retrying with doubled precision up to ``max_bits``."""
    _check_d(d)
    D = fundamental_discriminant(d)
    unit = fundamental_unit(d)
    while True:
        try:
            return dirichlet_class_number(D, unit, bits)[0]
        except PrecisionError:
            if bits >= max_bits:
                raise
            bits = max(2 * bits, DEFAULT_BITS)


@lru_cache(maxsize=None)
def quad_field(d: int, bits: int = DEFAULT_BITS) -> QuadField:
    unit = fundamental_unit(d)
    return QuadField(d, fundamental_discriminant(d), unit, regulator(unit, bits), class_number_quad(d, bits))


# -- independent oracle: cycles of reduced indefinite forms -----------------


def is_fundamental_discriminant(D: int) -> bool:
    if D % 4 == 1:
        return is_squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (2, 3) and is_squarefree(m)
    return False


def reduced_forms(D: int) -> list[tuple[int, int, int]]:
    """All reduced forms (a, b, c), b^2 - 4ac = D: 0 < b < sqrt D, sqrt D - b < 2|a| < sqrt D + b."""
    s = isqrt(D)
    forms = []
    for b in range(s, 0, -1):
        if (b - D) % 2:
            continue
        n = (D - b * b) // 4  # = -ac > 0
        for a in range((s - b) // 2 + 1, (s + b) // 2 + 1):
            if n % a == 0:
                c = n // a
                forms.append((a, b, -c))
                forms.append((-a, b, c))
    return forms


def rho(form: tuple[int, int, int], D: int) -> tuple[int, int, int]:
    """Reduction step (a, b, c) -> (c, b', (b'^2 - D)/4c), b' = -b mod 2c, sqrt D - 2|c| < b' < sqrt D."""
    _, b, c = form
    s = isqrt(D)
    m = 2 * abs(c)
    lo = s - m + 1
    b2 = lo + (-b - lo) % m
    return c, b2, (b2 * b2 - D) // (4 * c)


def class_number_forms_oracle(D: int) -> int:
    """Wide class number from the cycle structure of reduced forms of discriminant D.

    The number of rho-cycles is the narrow class number h+. The fundamental
    unit has norm -1 exactly when the principal cycle meets a form with
    leading coefficient -1, in which case h = h+; otherwise h = h+/2.
    """
    if D <= 1 or not is_fundamental_discriminant(D):
        raise ValueError(f"not a positive fundamental discriminant: {D}")
    forms = reduced_forms(D)
    unseen = set(forms)
    s = isqrt(D)
    b0 = s if (s - D) % 2 == 0 else s - 1
    principal = (1, b0, (b0 * b0 - D) // 4)
    cycles = 0
    norm_minus = False
    for start in [principal] + forms:
        if start not in unseen:
            continue
        cycles += 1
        f = start
        while f in unseen:
            unseen.remove(f)
            if start == principal and f[0] == -1:
                norm_minus = True
            f = rho(f, D)
        if f != start:
            raise AssertionError(f"rho orbit of {start} is not a cycle")
    return cycles if norm_minus else cycles // 2

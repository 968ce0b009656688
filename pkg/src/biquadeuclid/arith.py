"""Exact integer number theory: primality, sieving, residue symbols, CRT.

Everything here works on Python ints, so there is no overflow at any size.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from math import gcd, isqrt, prod
from typing import Sequence

# Deterministic Miller-Rabin: the first twelve primes are a valid witness set
# for every n < 3.317e24, which covers 2**64 with room to spare.
MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_DETERMINISTIC_LIMIT = 3_317_044_064_679_887_385_961_981
# 64 random rounds bound the error by 4**-64 = 2**-128.
_MR_RANDOM_ROUNDS = 64


def mod_pow(base: int, exp: int, modulus: int) -> int:
    """Return base**exp mod modulus in [0, modulus)."""
    if modulus < 1:
        raise ValueError("modulus must be positive")
    if exp < 0:
        raise ValueError("exponent must be non-negative")
    return pow(base, exp, modulus)


def _mr_round(n: int, d: int, s: int, a: int) -> bool:
    x = pow(a, d, n)
    if x == 1 or x == n - 1:
        return True
    for _ in range(s - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_prime(n: int) -> bool:
    """Miller-Rabin primality test.

    Deterministic below 3.3e24 (fixed witnesses ``MR_WITNESSES``). Above that,
    64 extra rounds with bases drawn from an RNG seeded by ``n`` itself, so the
    answer is still reproducible run to run.
    """
    if n < 2:
        return False
    for p in MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    if not all(_mr_round(n, d, s, a) for a in MR_WITNESSES):
        return False
    if n < _MR_DETERMINISTIC_LIMIT:
        return True
    rng = random.Random(n)
    return all(_mr_round(n, d, s, rng.randrange(2, n - 1)) for _ in range(_MR_RANDOM_ROUNDS))


def sieve_primes(limit: int) -> list[int]:
    """All primes in [2, limit], ascending (Eratosthenes)."""
    if limit < 2:
        return []
    flags = bytearray([1]) * (limit + 1)
    flags[0] = flags[1] = 0
    for i in range(2, isqrt(limit) + 1):
        if flags[i]:
            flags[i * i :: i] = bytes(len(range(i * i, limit + 1, i)))
    return [i for i, f in enumerate(flags) if f]


def factorize(n: int) -> dict[int, int]:
    """Trial-division factorisation; fine for the field sizes used here."""
    if n < 1:
        raise ValueError("factorize needs a positive integer")
    out: dict[int, int] = {}
    for p in (2, 3):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f = 5
    while f * f <= n:
        for p in (f, f + 2):
            while n % p == 0:
                out[p] = out.get(p, 0) + 1
                n //= p
        f += 6
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def is_squarefree(n: int) -> bool:
    return n != 0 and all(e == 1 for e in factorize(abs(n)).values())


def legendre_unchecked(a: int, p: int) -> int:
    """Euler's criterion without validating ``p``; for hot loops over sieved primes."""
    r = pow(a, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) via Euler's criterion a^((p-1)/2) mod p."""
    if p < 3 or p % 2 == 0 or not is_prime(p):
        raise ValueError(f"invalid modulus: {p} is not an odd prime")
    return legendre_unchecked(a, p)


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a/n), by the binary reciprocity recursion.

    Deliberately shares no code with :func:`legendre` so each can check the other.
    """
    if a == 0 and n == 0:
        raise ValueError("undefined symbol: kronecker(0, 0)")
    if n == 0:
        return 1 if a in (1, -1) else 0
    if a % 2 == 0 and n % 2 == 0:
        return 0
    # (a/2) = 0 for even a, else +1 for a = +-1 mod 8 and -1 for a = +-3 mod 8
    tab2 = (0, 1, 0, -1, 0, -1, 0, 1)
    v = 0
    while n % 2 == 0:
        v += 1
        n //= 2
    k = tab2[a & 7] if v % 2 else 1
    if n < 0:
        n = -n
        if a < 0:
            k = -k
    while a != 0:
        v = 0
        while a % 2 == 0:
            v += 1
            a //= 2
        if v % 2:
            k *= tab2[n & 7]
        if a & n & 2:
            k = -k
        r = abs(a)
        a = n % r
        n = r
    return k if n == 1 else 0


@dataclass(frozen=True)
class CongruenceSystem:
    """x = residues[i] (mod moduli[i]) for pairwise coprime moduli."""

    residues: tuple[int, ...]
    moduli: tuple[int, ...]

    def __init__(self, residues: Sequence[int], moduli: Sequence[int]):
        if len(residues) != len(moduli) or not moduli:
            raise ValueError("residues and moduli must be non-empty and of equal length")
        if any(m < 1 for m in moduli):
            raise ValueError("moduli must be positive")
        for i in range(len(moduli)):
            for j in range(i + 1, len(moduli)):
                if gcd(moduli[i], moduli[j]) != 1:
                    raise ValueError("moduli not pairwise coprime")
        object.__setattr__(self, "moduli", tuple(moduli))
        object.__setattr__(self, "residues", tuple(r % m for r, m in zip(residues, moduli)))


def crt(system: CongruenceSystem) -> tuple[int, int]:
    """Solve a :class:`CongruenceSystem`; returns (solution, modulus)."""
    modulus = prod(system.moduli)
    x = 0
    for r, m in zip(system.residues, system.moduli):
        rest = modulus // m
        x += r * rest * pow(rest, -1, m)
    return x % modulus, modulus

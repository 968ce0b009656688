"""Splitting of rational primes in K = Q(sqrt q, sqrt kr) and H(K) = Q(sqrt q, sqrt k, sqrt r).

Both fields are multiquadratic, so Frobenius lives in an elementary abelian
2-group and is read off the quadratic characters: a prime has residue degree
1 when every character is +1 and residue degree 2 otherwise.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .arith import is_prime, kronecker, legendre_unchecked, sieve_primes
from .biquad import PrimeTriple
from .quadfield import fundamental_discriminant


class CertificateError(RuntimeError):
    """A prime predicted by a certificate fails the splitting check."""


@dataclass(frozen=True)
class SplittingProfile:
    p: int
    sym_q: int
    sym_k: int
    sym_r: int
    in_XK: bool
    in_XH: bool
    f_K: Optional[int]  # None when p ramifies
    f_H: Optional[int]
    witnesses_generator: bool

    @property
    def ramified(self) -> bool:
        return 0 in (self.sym_q, self.sym_k, self.sym_r)


def _symbol(s: int, p: int) -> int:
    # For odd p this is the Legendre symbol (s/p); at p = 2 the splitting of 2
    # in Q(sqrt s) is given by the Kronecker symbol of the discriminant.
    if p == 2:
        return kronecker(fundamental_discriminant(s), 2)
    return legendre_unchecked(s, p)


def _profile(p: int, q: int, k: int, r: int) -> SplittingProfile:
    sq, sk, sr = _symbol(q, p), _symbol(k, p), _symbol(r, p)
    if 0 in (sq, sk, sr):
        return SplittingProfile(p, sq, sk, sr, False, False, None, None, False)
    in_XK = sq == 1 and sk * sr == 1
    in_XH = sq == sk == sr == 1
    f_K = 1 if in_XK else 2
    f_H = 1 if in_XH else 2
    return SplittingProfile(p, sq, sk, sr, in_XK, in_XH, f_K, f_H, in_XK and not in_XH)


def splitting_profile(p: int, triple: PrimeTriple) -> SplittingProfile:
    """Legendre-symbol profile of the prime p relative to K and H(K).

    Primes dividing the discriminant of H(K) come back with ``ramified`` set
    and every splitting flag False.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    return _profile(p, triple.q, triple.k, triple.r)


def nonprincipal_witness(profile: SplittingProfile) -> bool:
    """Residue degree 1 in K and 2 in H(K): the prime of K above p is non-principal.

    With |Cl_K| = 2 such a prime generates the class group.
    """
    return profile.f_K == 1 and profile.f_H == 2


@dataclass(frozen=True)
class DensityReport:
    triple: PrimeTriple
    bound: int
    count_XK: int
    count_XH: int
    count_diff: int
    total_primes: int  # unramified primes <= bound

    @property
    def ratio_XK(self) -> float:
        return self.count_XK / self.total_primes

    @property
    def ratio_XH(self) -> float:
        return self.count_XH / self.total_primes

    @property
    def ratio_diff(self) -> float:
        return self.count_diff / self.total_primes


def _count_range(args: tuple[int, int, int, int, int]) -> tuple[int, int, int, int]:
    q, k, r, lo, hi = args
    xk = xh = diff = total = 0
    for p in sieve_primes(hi):
        if p < lo:
            continue
        prof = _profile(p, q, k, r)
        if prof.ramified:
            continue
        total += 1
        xk += prof.in_XK
        xh += prof.in_XH
        diff += prof.witnesses_generator
    return xk, xh, diff, total


def density_estimate(triple: PrimeTriple, bound: int, workers: int = 1) -> DensityReport:
    """Count unramified primes <= bound in X_K, X_H(K) and X_K minus X_H(K).

    With ``workers > 1`` the range is split into disjoint blocks counted in
    separate processes; the merged counts are identical to the serial ones.
    """
    if bound < 2:
        raise ValueError("bound must be at least 2")
    q, k, r = triple.q, triple.k, triple.r
    if workers <= 1:
        parts = [_count_range((q, k, r, 2, bound))]
    else:
        edges = [2 + (bound - 1) * i // workers for i in range(workers + 1)]
        jobs = [(q, k, r, edges[i], edges[i + 1] - 1 if i < workers - 1 else bound) for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_count_range, jobs))
    xk, xh, diff, total = (sum(col) for col in zip(*parts))
    return DensityReport(triple, bound, xk, xh, diff, total)


def generator_prime_count(triple: PrimeTriple, u: int, modulus: int, bound: int) -> tuple[list[int], int]:
    """Primes p <= bound with p = u (mod modulus), each checked to be a class-group generator witness."""
    primes = []
    start = u % modulus
    for p in range(start, bound + 1, modulus):
        if not is_prime(p):
            continue
        if not _profile(p, triple.q, triple.k, triple.r).witnesses_generator:
            raise CertificateError(f"certificate inconsistent: prime {p} = {u} mod {modulus} is not in X_K \\ X_H")
        primes.append(p)
    return primes, len(primes)

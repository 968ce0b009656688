"""Construction and independent verification of the integer u.

u is a prime with u = 3 (mod 4) and (q/u) = 1, (k/u) = (r/u) = -1, obtained
by CRT from auxiliary primes p1 < q, p2 < k, p3 < r (each = 3 mod 4) of the
right quadratic character, then by walking the progression x0 mod 4qkr.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Optional

from .arith import CongruenceSystem, crt, is_prime, kronecker, legendre
from .biquad import EXCLUDED_PRIMES, HypothesisError, PrimeTriple
from .splitting import SplittingProfile, splitting_profile

CASE1 = "Case1"  # (q, k, r) = (1, 3, 1) mod 4
CASE2 = "Case2"  # (3, 3, 1) mod 4
GENERALIZED = "Generalized"  # (1, 1, 1) and (3, 1, 1) mod 4

# desired (q/u), (k/u), (r/u)
TARGETS = (1, -1, -1)


class ResidueSearchError(ArithmeticError):
    pass


def least_qr3(p: int) -> int:
    """Least prime s < p, s = 3 mod 4, that is a quadratic residue mod p."""
    if not is_prime(p) or p in EXCLUDED_PRIMES:
        raise ValueError(f"least_qr3 needs a prime outside {sorted(EXCLUDED_PRIMES)}, got {p}")
    for s in range(3, p, 4):
        if is_prime(s) and legendre(s, p) == 1:
            return s
    raise ResidueSearchError(f"Q1 violation: no prime s < {p}, s = 3 mod 4, with (s/{p}) = 1")


def least_qnr3(p: int) -> int:
    """Least prime s < p, s = 3 mod 4, that is a quadratic non-residue mod p."""
    if p < 5 or not is_prime(p):
        raise ValueError(f"least_qnr3 needs a prime >= 5, got {p}")
    for s in range(3, p, 4):
        if is_prime(s) and legendre(s, p) == -1:
            return s
    raise ResidueSearchError(f"Q2 violation: no prime s < {p}, s = 3 mod 4, with (s/{p}) = -1")


@dataclass(frozen=True)
class AuxiliaryPlan:
    system: CongruenceSystem  # x = p1 (q), p2 (k), p3 (r), 3 (4)
    case_id: str
    characters: tuple[int, int, int]  # required (p1/q), (p2/k), (p3/r)
    auxiliaries: tuple[int, int, int]
    swapped: bool  # k and r exchanged internally


def required_characters(triple: PrimeTriple) -> tuple[int, int, int]:
    """Character (u/s) needed for each s in (q, k, r) so that (s/u) hits TARGETS when u = 3 mod 4.

    Reciprocity with (u-1)/2 odd gives (s/u) = (u/s) for s = 1 mod 4 and
    (s/u) = -(u/s) for s = 3 mod 4.
    """
    return tuple(t if s % 4 == 1 else -t for s, t in zip((triple.q, triple.k, triple.r), TARGETS))


def _case_id(triple: PrimeTriple) -> str:
    return {(1, 3, 1): CASE1, (3, 3, 1): CASE2}.get(triple.classes_mod4, GENERALIZED)


def build_congruence_system(triple: PrimeTriple) -> AuxiliaryPlan:
    if not triple.eligible:
        raise HypothesisError(f"triple {triple} is not eligible")
    swapped = triple.k % 4 == 1 and triple.r % 4 == 3
    work = PrimeTriple(triple.q, triple.r, triple.k) if swapped else triple
    chars = required_characters(work)
    aux = tuple(least_qr3(s) if c == 1 else least_qnr3(s) for s, c in zip((work.q, work.k, work.r), chars))
    if swapped:
        aux = (aux[0], aux[2], aux[1])
        chars = (chars[0], chars[2], chars[1])
    system = CongruenceSystem((*aux, 3), (triple.q, triple.k, triple.r, 4))
    return AuxiliaryPlan(system, _case_id(work), chars, aux, swapped)


@dataclass(frozen=True)
class WitnessCertificate:
    triple: PrimeTriple
    case_id: str
    p1: int
    p2: int
    p3: int
    x0: int
    modulus: int  # 4qkr
    u: int
    l: int  # 16qkr
    checks: dict = field(compare=False)
    sample_prime: int = 0
    sample_profile: Optional[SplittingProfile] = None

    @property
    def valid(self) -> bool:
        return all(self.checks.values())


def _check_u(triple: PrimeTriple, u: int, l: int, profile: SplittingProfile) -> dict:
    return {
        "c1": gcd(u, l) == 1,
        "c2": (u - 1) % 2 == 0 and gcd((u - 1) // 2, l) == 1,
        "e1": (legendre(triple.q, u), legendre(triple.k, u), legendre(triple.r, u)) == TARGETS,
        "c3": profile.f_K == 1 and profile.f_H == 2,
    }


def construct_u(triple: PrimeTriple, prime_search_bound: Optional[int] = None) -> WitnessCertificate:
    """Least prime u = x0 (mod 4qkr), with x0 from the auxiliary-prime CRT system.

    ``prime_search_bound`` caps u; the default allows 10**6 steps along the progression.
    """
    plan = build_congruence_system(triple)
    x0, modulus = crt(plan.system)
    if gcd(x0, modulus) != 1:
        raise AssertionError(f"gcd(x0, 4qkr) = {gcd(x0, modulus)} contradicts the construction")
    bound = prime_search_bound if prime_search_bound is not None else x0 + 10**6 * modulus
    u = x0
    while not is_prime(u):
        u += modulus
        if u > bound:
            raise ResidueSearchError(f"search bound exceeded: no prime = {x0} mod {modulus} below {bound}")
    l = 4 * modulus
    # u is the least prime of its progression, so it is its own sample prime
    profile = splitting_profile(u, triple)
    p1, p2, p3 = plan.auxiliaries
    return WitnessCertificate(
        triple, plan.case_id, p1, p2, p3, x0, modulus, u, l, _check_u(triple, u, l, profile), u, profile
    )


@dataclass(frozen=True)
class VerificationReport:
    checks: dict
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return all(self.checks.values())


def verify_certificate(cert: WitnessCertificate) -> VerificationReport:
    """Recompute every claim of ``cert`` from its raw integers."""
    q, k, r = cert.triple.q, cert.triple.k, cert.triple.r
    sym = kronecker  # independent of the Euler-criterion path used by construct_u
    qkr = q * k * r
    u = cert.u
    checks = {
        "triple_eligible": cert.triple.eligible,
        "u_prime": is_prime(u),
        "aux_prime": all(is_prime(p) for p in (cert.p1, cert.p2, cert.p3)),
        "aux_3_mod_4": all(p % 4 == 3 for p in (cert.p1, cert.p2, cert.p3)),
        "aux_bounds": cert.p1 < q and cert.p2 < k and cert.p3 < r,
        "x0_congruences": (
            0 <= cert.x0 < 4 * qkr
            and cert.x0 % q == cert.p1 % q
            and cert.x0 % k == cert.p2 % k
            and cert.x0 % r == cert.p3 % r
            and cert.x0 % 4 == 3
        ),
        "modulus": cert.modulus == 4 * qkr,
        "u_progression": u % (4 * qkr) == cert.x0,
        "l_value": cert.l == 16 * qkr,
        "c1_gcd_u_l": gcd(u, 16 * qkr) == 1,
        "c2_gcd_half_u_l": u % 2 == 1 and gcd((u - 1) // 2, 16 * qkr) == 1,
        "e1_symbols": (sym(q, u), sym(k, u), sym(r, u)) == TARGETS,
    }
    sp = cert.sample_prime
    if sp and is_prime(sp) and sp % (4 * qkr) == u % (4 * qkr):
        sq, sk, sr = sym(q, sp), sym(k, sp), sym(r, sp)
        checks["c3_sample_prime"] = sq == 1 and sk == sr == -1
    else:
        checks["c3_sample_prime"] = False
    notes = ("unit surjectivity onto (O_K/P)^*: not checked",)
    return VerificationReport(checks, notes)


def reciprocity_identity(s: int, u: int) -> tuple[int, int]:
    """Both sides of (s/u) = (-1)^((s-1)/2 * (u-1)/2) * (u/s) for odd primes s != u."""
    lhs = legendre(s, u)
    sign = -1 if ((s - 1) // 2 * ((u - 1) // 2)) % 2 else 1
    return lhs, sign * legendre(u, s)

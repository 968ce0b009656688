"""Mechanical checks for Euclidean ideal classes in biquadratic fields Q(sqrt q, sqrt kr)."""

from .arith import CongruenceSystem, crt, is_prime, kronecker, legendre, mod_pow, sieve_primes
from .biquad import (
    BiquadField,
    KElement,
    PrimeTriple,
    class_number_biquad,
    conductor,
    hilbert_class_field,
    is_square_in_K,
    unit_index,
    verify_unramified,
)
from .quadfield import (
    FundamentalUnit,
    QuadField,
    class_number_forms_oracle,
    class_number_quad,
    fundamental_discriminant,
    fundamental_unit,
)
from .splitting import density_estimate, generator_prime_count, nonprincipal_witness, splitting_profile
from .witness import WitnessCertificate, construct_u, least_qnr3, least_qr3, verify_certificate

__version__ = "0.1.0"

"""Even polynomial confinement potentials V(x) = sum_k c_{2k} x^(2k).

Coefficients are stored as exact rationals; they are rounded once, at the
working precision of whatever computation consumes them.  The empty
coefficient list (zero potential, particle in a box) is allowed as a
testing special case.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from mpmath import mpf, workdps

from .errors import ConfigError
from .precision import parse_exact, to_mpf

_EXPONENT_KEY_RE = re.compile(r"^x\^(\d+)$")


@dataclass(frozen=True)
class Potential:
    """An even polynomial with positive leading coefficient.

    `terms` maps the half-exponent k (so the monomial is x^(2k)) to its
    exact rational coefficient.  Zero coefficients are dropped.
    """

    terms: tuple[tuple[int, Fraction], ...]
    name: str | None = None

    def __post_init__(self):
        ks = [k for k, _ in self.terms]
        if ks != sorted(ks) or len(set(ks)) != len(ks):
            raise ConfigError("potential exponents must be distinct and ascending")
        for k, coeff in self.terms:
            if k < 1:
                raise ConfigError(f"exponent 2k={2 * k} must be >= 2")
        if self.terms and self.terms[-1][1] <= 0:
            raise ConfigError(
                f"leading coefficient of x^{2 * self.terms[-1][0]} must be positive"
            )

    @property
    def degree_half(self) -> int:
        """Highest half-exponent present (0 for the zero potential)."""
        return self.terms[-1][0] if self.terms else 0

    def coefficient(self, k: int) -> Fraction:
        for kk, coeff in self.terms:
            if kk == k:
                return coeff
        return Fraction(0)

    def as_spec(self) -> dict[str, str]:
        """Render back to the {"x^2": "1", ...} wire form."""
        out = {}
        for k, coeff in self.terms:
            out[f"x^{2 * k}"] = (
                str(coeff.numerator)
                if coeff.denominator == 1
                else f"{coeff.numerator}/{coeff.denominator}"
            )
        return out

    def describe(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for k, coeff in self.terms:
            c = str(coeff) if coeff.denominator > 1 else str(coeff.numerator)
            if parts and not c.startswith("-"):
                c = "+" + c
            parts.append(f"{c} x^{2 * k}")
        return " ".join(parts)


def parse_potential(spec: dict, name: str | None = None) -> Potential:
    """Build a Potential from a {"x^2": coeff-string, ...} mapping.

    Coefficient strings may be integers, decimals, or "p/q" rationals;
    they are kept exact.  Raises ConfigError for odd exponents, a
    non-positive leading coefficient, or unparseable numbers.
    """
    if not isinstance(spec, dict):
        raise ConfigError("potential spec must be a mapping of exponents to coefficients")
    terms = []
    for key, raw in spec.items():
        m = _EXPONENT_KEY_RE.match(str(key).strip())
        if not m:
            raise ConfigError(f"bad exponent key {key!r}; expected like 'x^4'")
        power = int(m.group(1))
        if power < 2 or power % 2 != 0:
            raise ConfigError(f"exponent in {key!r} must be a positive even integer")
        try:
            coeff = parse_exact(raw)
        except ValueError as exc:
            raise ConfigError(f"coefficient for {key}: {exc}") from exc
        if coeff != 0:
            terms.append((power // 2, coeff))
    terms.sort()
    return Potential(terms=tuple(terms), name=name)


def eval_potential(p: Potential, x, precision: int = 30) -> mpf:
    """Evaluate V(x) at the given decimal precision (>= 16 digits)."""
    if precision < 16:
        raise ConfigError("evaluation precision must be at least 16 digits")
    with workdps(precision):
        if not p.terms:
            return mpf(0)
        u = to_mpf(x) ** 2
        # Horner over x^2, filling the gaps between present exponents.
        acc = to_mpf(p.terms[-1][1])
        prev_k = p.terms[-1][0]
        for k, coeff in reversed(p.terms[:-1]):
            acc = acc * u ** (prev_k - k) + to_mpf(coeff)
            prev_k = k
        return acc * u**prev_k


def eval_potential_float(p: Potential, x):
    """Float64 evaluation (scalar or numpy array); used by the FD oracle."""
    if not p.terms:
        return x * 0.0
    u = x * x
    acc = float(p.terms[-1][1])
    prev_k = p.terms[-1][0]
    for k, coeff in reversed(p.terms[:-1]):
        acc = acc * u ** (prev_k - k) + float(coeff)
        prev_k = k
    return acc * u**prev_k


def min_value_estimate(p: Potential, half_width: Fraction, samples: int = 4096) -> float:
    """Sampled lower estimate of min V on [-L, L] (even, so [0, L] suffices)."""
    if not p.terms:
        return 0.0
    L = float(half_width)
    lo = 0.0
    for i in range(samples + 1):
        v = eval_potential_float(p, L * i / samples)
        if v < lo:
            lo = v
    return lo

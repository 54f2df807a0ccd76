"""Exact-number parsing and decimal-string helpers.

Every high-precision value crosses module and process boundaries as a
decimal string; binary floats appear only inside the low-precision
finite-difference oracle.  Coefficients and wall positions are kept as
exact rationals until they enter a computation at a chosen working
precision.
"""

from __future__ import annotations

import re
from fractions import Fraction

from mpmath import mp, mpf, workdps

_RATIONAL_RE = re.compile(r"^[+-]?\d+\s*/\s*\d+$")


def parse_exact(text) -> Fraction:
    """Parse an integer, decimal, or "p/q" string into an exact Fraction."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"expected an exact number string, got {type(text).__name__}")
    s = text.strip()
    if not s:
        raise ValueError("empty number string")
    try:
        if _RATIONAL_RE.match(s):
            num, den = s.split("/")
            return Fraction(int(num), int(den))
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"unparseable number {text!r}") from exc


def to_mpf(value) -> mpf:
    """Convert an exact rational (or int/str/mpf) to mpf at the current precision."""
    if isinstance(value, Fraction):
        if value.denominator == 1:
            return mpf(value.numerator)
        return mpf(value.numerator) / mpf(value.denominator)
    if isinstance(value, str):
        return to_mpf(parse_exact(value))
    return mpf(value)


def fixed_sig(x, sig: int) -> str:
    """Render x with `sig` significant digits, keeping trailing zeros."""
    if x == 0:
        return "0." + "0" * (sig - 1)
    # A local precision bump keeps nstr from rounding through stale context.
    with workdps(sig + 10):
        return mp.nstr(mpf(x), sig, strip_zeros=False)


def group_thousandths(s: str) -> str:
    """Insert spaces every three fractional digits, e.g. -2.000 000 000."""
    if "e" in s or "E" in s:
        return s
    if "." not in s:
        return s
    head, frac = s.split(".", 1)
    groups = [frac[i : i + 3] for i in range(0, len(frac), 3)]
    return head + "." + " ".join(groups)


def _normalize(s: str):
    """Break a decimal string into (sign, exponent, significant digits).

    The value equals sign * 0.digits * 10**exponent.  Returns None for a
    string whose significant digits are all zero.
    """
    s = s.strip().replace(" ", "")
    sign = 1
    if s.startswith(("+", "-")):
        if s[0] == "-":
            sign = -1
        s = s[1:]
    mant, _, exp_part = s.partition("e") if "e" in s else s.partition("E")
    exp = int(exp_part) if exp_part else 0
    int_part, _, frac_part = mant.partition(".")
    digits = (int_part + frac_part).lstrip("0")
    if not digits.strip("0"):
        return None
    if int_part.lstrip("0"):
        exponent = len(int_part.lstrip("0")) + exp
    else:
        exponent = exp - (len(frac_part) - len(digits))
    return sign, exponent, digits


def matched_sig_digits(a: str, b: str) -> int:
    """Count leading significant digits on which two decimal strings agree.

    Sign or magnitude (decimal exponent) disagreement counts as zero
    matched digits; callers compensate for end-digit rounding by rounding
    the computed value to the reference length before comparing.
    """
    na, nb = _normalize(a), _normalize(b)
    if na is None and nb is None:
        return 1
    if na is None or nb is None:
        return 0
    if na[0] != nb[0] or na[1] != nb[1]:
        return 0
    count = 0
    for da, db in zip(na[2], nb[2]):
        if da != db:
            break
        count += 1
    return count


def matches_reference(computed, reference: str) -> tuple[int, bool]:
    """Compare a computed value against a quoted reference string.

    The computed value is rounded to the reference's significant length
    before comparison; a truncated rendering is accepted too, because a
    printed table may truncate rather than round its last digit.  Returns
    (matched_digit_count, all_quoted_digits_matched).
    """
    ref_norm = _normalize(reference)
    if ref_norm is None:
        raise ValueError(f"reference string {reference!r} has no significant digits")
    quoted = len(ref_norm[2])
    rounded = fixed_sig(computed, quoted)
    matched = matched_sig_digits(rounded, reference)
    if matched >= quoted:
        return matched, True
    # Retry against a truncation of one extra rounded digit.
    longer = _normalize(fixed_sig(computed, quoted + 1))
    if longer is not None and longer[0] == ref_norm[0] and longer[1] == ref_norm[1]:
        if longer[2][:quoted] == ref_norm[2]:
            return quoted, True
    return matched, False

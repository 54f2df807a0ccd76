"""Power-series solutions of  -psi'' + V(x) psi = E psi.

For an even polynomial V the solution splits by parity: even solutions
start from (a_0, a_1) = (1, 0), odd ones from (0, 1), normalization
ignored.  Coefficients follow the recurrence

    a_n = [ -E a_{n-2} + sum_k c_{2k} a_{n-2-2k} ] / (n (n-1)),   a_{n<0} = 0,

so only every second coefficient is nonzero and the series is entire.
Summing it at the wall suffers catastrophic cancellation: partial sums
grow far above the final value, which costs log10(peak/|result|) digits.
Evaluation therefore escalates the working precision until two successive
precisions agree, and reports the observed cancellation so callers can
pre-pad their next request.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from mpmath import mp, mpf, workdps

from .errors import ConfigError, PrecisionExhausted
from .potential import Potential
from .precision import to_mpf

DEFAULT_ORDER_CAP = 20_000
DEFAULT_DPS_CAP = 2_000


class Parity(Enum):
    EVEN = "even"
    ODD = "odd"

    @property
    def offset(self) -> int:
        return 0 if self is Parity.EVEN else 1


@dataclass(frozen=True)
class SeriesSolution:
    """A truncated series for one (energy, parity), plus convergence metadata.

    `coefficients` holds a_0 .. a_order with exact zeros at the indices of
    the opposite parity.  `peak_partial_sum` and `cancellation_digits`
    describe the summation at the evaluation point that produced this
    solution (the wall, for boundary values).
    """

    parity: Parity
    energy: mpf
    coefficients: tuple
    order: int
    working_dps: int
    target_digits: int
    cancellation_digits: float = 0.0
    peak_partial_sum: mpf = mpf(0)

    def active(self) -> tuple:
        """The nonzero-parity coefficients a_offset, a_offset+2, ..."""
        return self.coefficients[self.parity.offset :: 2]


def _potential_table(p: Potential) -> list:
    return [(k, to_mpf(c)) for k, c in p.terms]


def _full_coefficients(act: list, offset: int, order: int) -> tuple:
    coeffs = [mpf(0)] * (order + 1)
    for r, a in enumerate(act):
        coeffs[2 * r + offset] = a
    return tuple(coeffs)


def series_coefficients(
    p: Potential,
    energy,
    parity: Parity,
    n_max: int,
    working_precision: int,
) -> SeriesSolution:
    """Generate a_0 .. a_{n_max} at a fixed order and working precision."""
    if n_max < 2:
        raise ConfigError("n_max must be at least 2")
    if working_precision < 16:
        raise ConfigError("working precision must be at least 16 digits")
    offset = parity.offset
    with workdps(working_precision):
        E = energy if isinstance(energy, mpf) else to_mpf(energy)
        bs = _potential_table(p)
        act = [mpf(1)]
        for r in range(1, (n_max - offset) // 2 + 1):
            n = 2 * r + offset
            acc = -E * act[r - 1]
            for k, b in bs:
                j = r - 1 - k
                if j >= 0:
                    acc += b * act[j]
            act.append(acc / (n * (n - 1)))
        return SeriesSolution(
            parity=parity,
            energy=E,
            coefficients=_full_coefficients(act, offset, n_max),
            order=n_max,
            working_dps=working_precision,
            target_digits=working_precision,
        )


def _sum_adaptive(p, energy, parity, x, target_digits, working_dps, order_cap):
    """One fixed-precision pass: sum terms until eight consecutive ones are
    negligible against the largest partial sum seen so far.

    Returns (value, active_coeffs, order, peak_partial_sum).
    """
    offset = parity.offset
    with workdps(working_dps):
        E = energy if isinstance(energy, mpf) else to_mpf(energy)
        xx = to_mpf(x)
        u = xx * xx
        bs = _potential_table(p)
        tiny = mpf(10) ** (-(target_digits + 4))
        act = [mpf(1)]
        xp = xx if offset else mpf(1)
        total = act[0] * xp
        peak = abs(total)
        streak = 0
        r = 0
        # Terms can only look converged once the deepest recurrence lag engages.
        min_r = p.degree_half + 4
        while streak < 8:
            r += 1
            n = 2 * r + offset
            if n > order_cap:
                raise PrecisionExhausted(
                    f"series did not converge within {order_cap} terms",
                    working_dps=working_dps,
                    order=order_cap,
                )
            acc = -E * act[r - 1]
            for k, b in bs:
                j = r - 1 - k
                if j >= 0:
                    acc += b * act[j]
            a = acc / (n * (n - 1))
            act.append(a)
            xp *= u
            term = a * xp
            total += term
            mag = abs(total)
            if mag > peak:
                peak = mag
            if r >= min_r and abs(term) <= tiny * peak:
                streak += 1
            else:
                streak = 0
        return total, act, 2 * r + offset, peak


def psi_fixed(
    p: Potential,
    energy,
    parity: Parity,
    x,
    target_digits: int,
    working_dps: int,
    order_cap: int = DEFAULT_ORDER_CAP,
):
    """Single-pass evaluation at a caller-chosen precision, without the
    precision-doubling check.  Used for calibrated scanning, where the
    needed precision was just measured at a nearby energy.

    Returns (value, peak_partial_sum).
    """
    value, _, _, peak = _sum_adaptive(p, energy, parity, x, target_digits, working_dps, order_cap)
    return value, peak


def _agree(v1, v2, peak, target_digits) -> bool:
    """Two-precision agreement test, with an absolute floor tied to the
    peak partial sum: near a boundary zero the value itself is smaller
    than any achievable relative tolerance."""
    with workdps(30):
        eps = mpf(10) ** (-target_digits)
        return abs(v1 - v2) <= eps * max(abs(v2), peak * eps)


def _cancellation(peak, value, working_dps) -> float:
    if peak == 0:
        return 0.0
    if value == 0:
        return float(working_dps)
    with workdps(30):
        return max(0.0, float(mp.log10(peak / abs(value))))


def psi_at(
    p: Potential,
    energy,
    parity: Parity,
    x,
    target_digits: int,
    *,
    start_pad: int = 0,
    order_cap: int = DEFAULT_ORDER_CAP,
    dps_cap: int = DEFAULT_DPS_CAP,
):
    """Evaluate psi(x; E) to target_digits with adaptive order and precision.

    Returns (value, SeriesSolution).  The working precision starts at
    target_digits + 20 (plus any caller-supplied pad) and doubles until
    two successive precisions agree; both the discarded tail and the
    rounding error then sit below 10^-target_digits relative to the
    returned value, or below that fraction of the peak partial sum when
    the value itself vanishes at a boundary zero.

    Raises PrecisionExhausted when the precision ceiling or the series
    order ceiling is hit first.
    """
    if target_digits < 10:
        raise ConfigError("target_digits must be at least 10")
    w = target_digits + 20 + max(0, int(start_pad))
    prev = None
    while True:
        if w > dps_cap:
            raise PrecisionExhausted(
                f"working precision ceiling {dps_cap} dps reached "
                f"(target {target_digits} digits at x={mp.nstr(to_mpf(x), 8)})",
                working_dps=w,
            )
        value, act, order, peak = _sum_adaptive(
            p, energy, parity, x, target_digits, w, order_cap
        )
        if prev is not None and _agree(prev, value, peak, target_digits):
            meta = SeriesSolution(
                parity=parity,
                energy=energy if isinstance(energy, mpf) else to_mpf(energy),
                coefficients=_full_coefficients(act, parity.offset, order),
                order=order,
                working_dps=w,
                target_digits=target_digits,
                cancellation_digits=_cancellation(peak, value, w),
                peak_partial_sum=peak,
            )
            return value, meta
        prev = value
        w *= 2


def suggested_pad(meta: SeriesSolution) -> int:
    """Start pad that lets the next psi_at call converge on its first pair."""
    return max(0, meta.working_dps // 2 - (meta.target_digits + 20))


def eval_series(sol: SeriesSolution, x):
    """Evaluate a converged series at another point |x| <= the original one.

    Parity is applied exactly: the sum runs over x^2, with one leading
    factor of x for odd solutions, so psi(-x) == +/-psi(x) bit for bit.
    Returns (value, peak_partial_sum_at_x) so callers can judge the local
    noise floor.
    """
    with workdps(sol.working_dps):
        xx = to_mpf(x)
        u = xx * xx
        xp = xx if sol.parity.offset else mpf(1)
        total = mpf(0)
        peak = mpf(0)
        for a in sol.active():
            total += a * xp
            mag = abs(total)
            if mag > peak:
                peak = mag
            xp *= u
        return total, peak

"""Eigenvalues of the hard-wall problem as roots of E -> psi_parity(L; E).

The boundary function is a polynomial in E for any fixed truncation, so
sign changes bracket roots.  Roots are localized by scanning, refined by
bisection with Ridders acceleration (never pure secant: a bracket is kept
at every step), and each refined level is verified by counting interior
wavefunction nodes, which must equal the level index for an ordered
one-dimensional spectrum.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpf, workdps

from .errors import (
    AmbiguousNode,
    ConfigError,
    MissedLevel,
    NoSignChange,
    PrecisionExhausted,
)
from .potential import Potential, min_value_estimate
from .precision import parse_exact, to_mpf
from .series import (
    DEFAULT_DPS_CAP,
    DEFAULT_ORDER_CAP,
    Parity,
    SeriesSolution,
    eval_series,
    psi_at,
    psi_fixed,
    series_coefficients,
    suggested_pad,
)


@dataclass(frozen=True)
class BoundaryProblem:
    """A potential confined to [-L, L] with a target precision in digits."""

    potential: Potential
    half_width: Fraction
    target_digits: int = 20
    order_cap: int = DEFAULT_ORDER_CAP
    dps_cap: int = DEFAULT_DPS_CAP

    def __post_init__(self):
        object.__setattr__(self, "half_width", parse_exact(self.half_width))
        if self.half_width <= 0:
            raise ConfigError("wall half-width L must be positive")
        if self.target_digits < 10:
            raise ConfigError("target_digits must be at least 10")

    def wall(self) -> mpf:
        """L at the current working precision."""
        return to_mpf(self.half_width)


@dataclass
class Eigenpair:
    """One converged level: 0-based index, parity, energy, and node count."""

    level: int
    parity: Parity
    energy: mpf
    converged_digits: int
    nodes: int
    series: SeriesSolution | None = None
    doublet: bool = False


def _sign(v) -> int:
    if v > 0:
        return 1
    if v < 0:
        return -1
    return 0


def _boundary_meta(bp: BoundaryProblem, parity: Parity, energy, *, start_pad=0, target=None):
    """Normalized boundary value psi(L)/peak plus the series metadata."""
    target = bp.target_digits if target is None else target
    value, meta = psi_at(
        bp.potential,
        energy,
        parity,
        bp.half_width,
        target,
        start_pad=start_pad,
        order_cap=bp.order_cap,
        dps_cap=bp.dps_cap,
    )
    with workdps(meta.working_dps):
        peak = meta.peak_partial_sum
        normalized = value / peak if peak > 0 else value
    return normalized, meta


def boundary_value(bp: BoundaryProblem, parity: Parity, energy) -> mpf:
    """psi_parity(L; E) scaled by the largest partial-sum magnitude, so
    values at different E are comparable in size."""
    value, _ = _boundary_meta(bp, parity, energy)
    return value


def _pair_brackets(grid, values, zero_tol):
    """Sign-change intervals, tolerating grid points that sit on a root."""
    signs = [0 if abs(v) <= zero_tol else _sign(v) for v in values]
    brackets = []
    last = None  # (index, sign) of last decisive point
    for i, s in enumerate(signs):
        if s == 0:
            continue
        if last is not None and s != last[1]:
            brackets.append((grid[last[0]], grid[i]))
        last = (i, s)
    return brackets


def scan_brackets(bp: BoundaryProblem, parity: Parity, e_min, e_max, steps: int):
    """Sign-change intervals of the boundary function on a uniform grid."""
    if steps < 2:
        raise ConfigError("steps must be at least 2")
    with workdps(bp.target_digits + 30):
        lo = to_mpf(e_min)
        hi = to_mpf(e_max)
        if not lo < hi:
            raise ConfigError("E_min must be below E_max")
        grid = [lo + (hi - lo) * i / steps for i in range(steps + 1)]
    pad = 0
    values = []
    for e in grid:
        v, meta = _boundary_meta(bp, parity, e, start_pad=pad)
        pad = suggested_pad(meta)
        values.append(v)
    # Converged values resolve the normalized boundary function down to
    # ~10^-2t of its unit scale; below that a sample counts as "on a root".
    zero_tol = mpf(10) ** (-(2 * bp.target_digits - 1))
    return _pair_brackets(grid, values, zero_tol)


def refine_root(bp: BoundaryProblem, parity: Parity, bracket) -> Eigenpair:
    """Polish one bracketed root to target_digits.

    Bisection interleaved with Ridders steps; the bracket never widens.
    converged_digits is relative for |E| >= 1 and absolute below that.
    """
    guard = bp.target_digits + 4
    wp = bp.target_digits + 40
    pad = 0

    def f(e):
        nonlocal pad
        v, meta = _boundary_meta(bp, parity, e, start_pad=pad, target=guard)
        pad = suggested_pad(meta)
        return v

    with workdps(wp):
        lo = to_mpf(bracket[0])
        hi = to_mpf(bracket[1])
        if not lo < hi:
            raise ConfigError("bracket must satisfy E_lo < E_hi")
        flo = f(lo)
        fhi = f(hi)
        slo, shi = _sign(flo), _sign(fhi)
        if slo == 0:
            hi = lo
        elif shi == 0:
            lo = hi
        elif slo == shi:
            raise NoSignChange(
                f"no sign change on bracket ({mp.nstr(lo, 12)}, {mp.nstr(hi, 12)})"
            )

        tol_scale = mpf(10) ** (-bp.target_digits)
        for _ in range(400):
            width = hi - lo
            mid = (lo + hi) / 2
            if width <= tol_scale * max(mpf(1), abs(mid)):
                break
            fm = f(mid)
            sm = _sign(fm)
            if sm == 0:
                lo = hi = mid
                break
            new = None
            disc = fm * fm - flo * fhi
            if disc > 0:
                xr = mid + (mid - lo) * (1 if flo > fhi else -1) * fm / mp.sqrt(disc)
                if lo < xr < hi and xr != mid:
                    fr = f(xr)
                    if _sign(fr) == 0:
                        lo = hi = xr
                        break
                    a, fa = (mid, fm) if mid < xr else (xr, fr)
                    b, fb = (xr, fr) if mid < xr else (mid, fm)
                    if _sign(fa) != _sign(fb):
                        new = (a, fa, b, fb)
                    elif _sign(fa) != _sign(flo):
                        new = (lo, flo, a, fa)
                    else:
                        new = (b, fb, hi, fhi)
            if new is None:
                if sm != _sign(flo):
                    new = (lo, flo, mid, fm)
                else:
                    new = (mid, fm, hi, fhi)
            lo, flo, hi, fhi = new
        else:
            raise PrecisionExhausted(
                "root refinement did not reach the requested width", working_dps=wp
            )

        energy = (lo + hi) / 2
        width = hi - lo
        scale = max(mpf(1), abs(energy))
        if width <= 0:
            digits = bp.target_digits
        else:
            digits = min(bp.target_digits, int(mp.floor(-mp.log10(width / scale))))

    _, meta = _boundary_meta(bp, parity, energy, start_pad=pad)
    eig = Eigenpair(
        level=-1,
        parity=parity,
        energy=energy,
        converged_digits=max(digits, 0),
        nodes=-1,
        series=meta,
    )
    eig.nodes = count_nodes(bp, eig)
    eig.level = eig.nodes
    return eig


def count_nodes(bp: BoundaryProblem, eig: Eigenpair, grid_points: int = 256) -> int:
    """Count interior zeros of the eigenfunction, excluding the walls.

    Works on the half-grid (0, L) and doubles, since parity makes zeros
    symmetric; odd states contribute one extra node at the origin.  The
    normalization fixes psi(0)=1 (even) or psi'(0)=1 (odd), so the sign
    just right of the origin is +1 in both cases.  Samples too close to
    the local rounding floor trigger a retry at doubled precision on a
    denser grid; a persistently undecidable sample raises AmbiguousNode.
    """
    if grid_points < 64:
        raise ConfigError("grid_points must be at least 64")
    sol = eig.series
    if sol is None:
        _, sol = _boundary_meta(bp, eig.parity, eig.energy)
        eig.series = sol

    for _ in range(3):
        crossings = _count_half_crossings(bp, sol, grid_points)
        if crossings is not None:
            return 2 * crossings + (1 if eig.parity is Parity.ODD else 0)
        sol = series_coefficients(
            bp.potential, eig.energy, eig.parity, sol.order, 2 * sol.working_dps
        )
        grid_points *= 2
    raise AmbiguousNode(
        f"node count undecidable near E={mp.nstr(eig.energy, 12)} "
        f"at {sol.working_dps} digits"
    )


def _count_half_crossings(bp: BoundaryProblem, sol: SeriesSolution, grid_points: int):
    """Sign changes of psi on (0, L), or None when a sample is ambiguous."""
    half = max(grid_points // 2, 32)
    w = sol.working_dps
    with workdps(w + 10):
        wall = bp.wall()
        xs = [wall * i / (half + 1) for i in range(1, half + 1)]
    floor_shift = mpf(10) ** (-(w - 8))
    signs = []
    for x in xs:
        v, peak = eval_series(sol, x)
        noise = peak * floor_shift
        signs.append(0 if abs(v) <= 8 * noise else _sign(v))

    # Zero runs flanked by equal signs would mean a tangency, which a true
    # eigenfunction cannot have; retry before declaring ambiguity.  A
    # trailing run is legitimate wall-side decay.
    i, n = 0, len(signs)
    while i < n:
        if signs[i] == 0:
            j = i
            while j < n and signs[j] == 0:
                j += 1
            if j < n:
                left = signs[i - 1] if i > 0 else 1
                if left == signs[j]:
                    return None
            i = j
        else:
            i += 1

    crossings = 0
    last_sign = 1
    prev_cross_at = None
    for i, s in enumerate(signs):
        if s == 0:
            continue
        if s != last_sign:
            if prev_cross_at is not None and i - prev_cross_at <= 1:
                return None  # two crossings within adjacent cells
            crossings += 1
            prev_cross_at = i
        last_sign = s
    return crossings


class _CalibratedScanner:
    """Grid scanning at reduced precision.

    Full adaptive evaluations at a few anchor energies measure the
    cancellation in play; the grid in between is evaluated in a single
    pass at that calibrated precision.  Bracket candidates are re-checked
    at full precision by refine_root, and missed levels are caught by the
    node-count verification, so the scan itself only needs reliable signs.
    """

    def __init__(self, bp: BoundaryProblem, parity: Parity, scan_digits: int):
        self.bp = bp
        self.parity = parity
        self.t = max(10, min(bp.target_digits, scan_digits))
        self.w = 0
        self.pad = 0

    def _anchor(self, e):
        v, meta = _boundary_meta(self.bp, self.parity, e, start_pad=self.pad, target=self.t)
        self.pad = suggested_pad(meta)
        self.w = max(self.w, meta.working_dps + 10)
        return v

    def scan(self, e_lo, e_hi, steps: int):
        with workdps(self.bp.target_digits + 30):
            lo = to_mpf(e_lo)
            hi = to_mpf(e_hi)
            grid = [lo + (hi - lo) * i / steps for i in range(steps + 1)]
        v_lo = self._anchor(grid[0])
        self._anchor(grid[steps // 2])
        v_hi = self._anchor(grid[-1])
        values = [v_lo]
        for e in grid[1:-1]:
            value, peak = psi_fixed(
                self.bp.potential, e, self.parity, self.bp.half_width,
                self.t, self.w, self.bp.order_cap,
            )
            with workdps(self.w):
                values.append(value / peak if peak > 0 else value)
        values.append(v_hi)
        zero_tol = mpf(10) ** (-(self.w - 6))
        return _pair_brackets(grid, values, zero_tol)


def _collect_parity(bp, parity, need, e_start, chunk_height, density, scan_digits):
    """Hunt upward from e_start until `need` levels of one parity are refined."""
    if need == 0:
        return []
    scanner = _CalibratedScanner(bp, parity, scan_digits)
    steps = max(16, int(round(chunk_height * density)))
    found = []
    lo = e_start
    for _ in range(60):
        hi = lo + chunk_height
        for bk in scanner.scan(lo, hi, steps):
            try:
                found.append(refine_root(bp, parity, bk))
            except NoSignChange:
                continue  # spurious bracket from the reduced-precision scan
            if len(found) >= need:
                return found
        lo = hi
    raise MissedLevel(
        f"no {need} {parity.value} levels found while scanning up from E={e_start}"
    )


def _flag_doublets(eigs, target_digits):
    """Mark adjacent levels whose spacing is below the target resolution."""
    with workdps(target_digits + 20):
        for a, b in zip(eigs, eigs[1:]):
            gap_tol = mpf(10) ** (-target_digits) * max(mpf(1), abs(a.energy))
            if abs(b.energy - a.energy) <= gap_tol:
                a.doublet = True
                b.doublet = True


def _consistent(eigs) -> bool:
    for idx, eig in enumerate(eigs):
        if eig.nodes != idx:
            return False
        want = Parity.EVEN if idx % 2 == 0 else Parity.ODD
        if eig.parity is not want:
            return False
    return True


def spectrum(
    bp: BoundaryProblem,
    count: int,
    *,
    scan_digits: int = 10,
    scan_density: float = 32.0,
    chunk_height: float = 8.0,
    max_rescans: int = 4,
) -> list:
    """The lowest `count` eigenvalues, merged across parities and verified.

    The scan window opens at min(0, min V) - 1 and expands upward until
    enough roots of each parity are found.  Node counts must match level
    indices; any inconsistency doubles the scan density and retries, and
    raises MissedLevel once retries are exhausted.  Levels closer than the
    target resolution are flagged as doublets rather than merged.
    """
    if count < 1:
        raise ConfigError("count must be at least 1")
    even_need = (count + 1) // 2
    odd_need = count // 2
    e_start = min(0.0, min_value_estimate(bp.potential, bp.half_width)) - 1.0
    density = scan_density
    last_err = None
    for _ in range(max_rescans + 1):
        try:
            eigs = _collect_parity(
                bp, Parity.EVEN, even_need, e_start, chunk_height, density, scan_digits
            )
            eigs += _collect_parity(
                bp, Parity.ODD, odd_need, e_start, chunk_height, density, scan_digits
            )
        except MissedLevel as err:
            last_err = err
            density *= 2
            continue
        eigs.sort(key=lambda e: (e.energy, e.nodes))
        for idx, eig in enumerate(eigs):
            eig.level = idx
        _flag_doublets(eigs, bp.target_digits)
        if _consistent(eigs):
            return eigs[:count]
        last_err = MissedLevel(
            "node counts "
            + str([e.nodes for e in eigs])
            + " disagree with level ordering; spectrum has a gap"
        )
        density *= 2
    raise last_err

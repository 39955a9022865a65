"""Symmetric coprime / dense array geometry and difference coarrays.

Sensor positions are stored as integer multiples of the base spacing ``d``,
so coarray bookkeeping (lag sets, multiplicities, consecutive runs) is exact
integer arithmetic; meters appear only at the API surface.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "CoprimeParams",
    "SensorLayout",
    "CoarrayLayout",
    "build_coprime_layout",
    "build_dense_layout",
    "build_subarrays",
    "difference_coarray",
    "max_targets",
]


def _check_spacing(d: float, wavelength: float, strict: bool) -> None:
    # Spacing above lambda/4 aliases the doubled-position (self-spectrum)
    # steering; kept as a warning so the ambiguity can be studied on purpose.
    if d > wavelength / 4.0 * (1.0 + 1e-12):
        msg = (
            f"spacing d={d:g} m exceeds lambda/4={wavelength / 4.0:g} m; "
            "angle estimates may be ambiguous"
        )
        if strict:
            raise ValueError(msg)
        warnings.warn(msg, UserWarning, stacklevel=3)


@dataclass(frozen=True)
class CoprimeParams:
    """Coprime integer pair with base spacing and carrier wavelength.

    ``m`` and ``n`` are normalized so that ``m < n``.  ``d`` is the minimum
    inter-sensor spacing in meters; ``wavelength`` is the carrier wavelength
    in meters.  ``strict_spacing=True`` turns the d > lambda/4 diagnostic
    into a hard error.
    """

    m: int
    n: int
    d: float
    wavelength: float
    strict_spacing: bool = False

    def __post_init__(self) -> None:
        m, n = int(self.m), int(self.n)
        if m > n:
            m, n = n, m
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "n", n)
        if m < 1:
            raise ValueError("coprime integers must be positive")
        if m == n:
            raise ValueError("coprime pair must be two distinct integers")
        if math.gcd(m, n) != 1:
            raise ValueError(f"m={m} and n={n} are not coprime")
        if not (self.d > 0.0 and self.wavelength > 0.0):
            raise ValueError("spacing and wavelength must be positive")
        _check_spacing(self.d, self.wavelength, self.strict_spacing)


@dataclass(frozen=True)
class SensorLayout:
    """A linear array on the integer grid ``positions = grid * d``.

    ``kind`` is one of ``"coprime"``, ``"dense"`` or ``"sparse-subarray"``.
    For coprime layouts ``coprime`` holds the generating parameters.
    """

    grid: tuple[int, ...]
    d: float
    wavelength: float
    kind: str
    coprime: CoprimeParams | None = None

    def __post_init__(self) -> None:
        g = self.grid
        if len(g) == 0:
            raise ValueError("layout needs at least one sensor")
        if any(g[i] >= g[i + 1] for i in range(len(g) - 1)):
            raise ValueError("grid positions must be strictly ascending")

    @classmethod
    def from_positions(
        cls,
        positions_m,
        d: float,
        wavelength: float,
        kind: str = "dense",
    ) -> "SensorLayout":
        """Build a layout from positions in meters, validating the d-grid.

        Positions must sit on the integer grid of ``d`` within ``1e-9 * d``.
        """
        pos = np.asarray(positions_m, dtype=float)
        grid = np.round(pos / d)
        if np.any(np.abs(pos - grid * d) > 1e-9 * d):
            raise ValueError("positions are not integer multiples of d")
        return cls(tuple(int(v) for v in grid), float(d), float(wavelength), kind)

    @property
    def positions(self) -> np.ndarray:
        """Sensor positions in meters, ascending."""
        return np.asarray(self.grid, dtype=float) * self.d

    @property
    def size(self) -> int:
        return len(self.grid)

    @property
    def half_count(self) -> int:
        """V such that a symmetric odd layout has 2V - 1 sensors."""
        return (len(self.grid) + 1) // 2

    @property
    def is_symmetric(self) -> bool:
        g = self.grid
        return all(g[i] == -g[len(g) - 1 - i] for i in range(len(g)))

    @property
    def aperture(self) -> float:
        """End-to-end extent in meters."""
        return (self.grid[-1] - self.grid[0]) * self.d

    @property
    def fresnel_distance(self) -> float:
        """Inner boundary of the usable near-field region, 1.2 * aperture."""
        return 1.2 * self.aperture

    @property
    def rayleigh_distance(self) -> float:
        """Outer boundary of the near-field region, 2 * aperture^2 / lambda."""
        return 2.0 * self.aperture**2 / self.wavelength


@dataclass(frozen=True)
class CoarrayLayout:
    """Difference coarray of a layout, in units of the base spacing.

    ``lags`` is the sorted unique difference set, ``multiplicity`` the number
    of sensor pairs generating each lag.  ``consecutive_segment`` is the
    maximal zero-centered run of step-1 lags; ``smoothing_segment`` is the
    (possibly shorter, central) run actually used for spatial smoothing.
    ``unit`` is the lag step in meters.
    """

    lags: tuple[int, ...]
    multiplicity: tuple[int, ...]
    consecutive_segment: tuple[int, ...]
    smoothing_segment: tuple[int, ...]
    unit: float

    @property
    def segment_length(self) -> int:
        return len(self.consecutive_segment)


def build_coprime_layout(params: CoprimeParams) -> SensorLayout:
    """Symmetric coprime array: {m*k*d, |k| < n} union {n*k*d, |k| < m}.

    The two generating sub-grids share only the origin, so the array has
    2(m + n - 1) - 1 sensors.
    """
    m, n = params.m, params.n
    grid = sorted(
        {m * k for k in range(-n + 1, n)} | {n * k for k in range(-m + 1, m)}
    )
    return SensorLayout(tuple(grid), params.d, params.wavelength, "coprime", params)


def build_dense_layout(
    u: int,
    d: float,
    wavelength: float,
    strict_spacing: bool = False,
) -> SensorLayout:
    """Uniform symmetric array with an odd number ``u`` of sensors."""
    if u < 1 or u % 2 == 0:
        raise ValueError("dense layout needs an odd, positive sensor count")
    if not (d > 0.0 and wavelength > 0.0):
        raise ValueError("spacing and wavelength must be positive")
    _check_spacing(d, wavelength, strict_spacing)
    half = (u - 1) // 2
    return SensorLayout(tuple(range(-half, half + 1)), d, wavelength, "dense")


def build_subarrays(params: CoprimeParams) -> tuple[SensorLayout, SensorLayout]:
    """The two uniform sparse subarrays whose union is the coprime array.

    Subarray 1 has 2m - 1 sensors at spacing n*d; subarray 2 has 2n - 1
    sensors at spacing m*d.  Each is returned on its own integer grid (unit
    = its spacing), so the generic coarray machinery applies unchanged.
    The > lambda/4 spacing of these grids is inherent, so no ambiguity
    diagnostic is emitted here.
    """
    m, n = params.m, params.n
    sub1 = SensorLayout(
        tuple(range(-m + 1, m)), n * params.d, params.wavelength,
        "sparse-subarray", params,
    )
    sub2 = SensorLayout(
        tuple(range(-n + 1, n)), m * params.d, params.wavelength,
        "sparse-subarray", params,
    )
    return sub1, sub2


@lru_cache(maxsize=64)
def difference_coarray(layout: SensorLayout, smoothing: str = "auto") -> CoarrayLayout:
    """Difference set of a layout with its zero-centered consecutive run.

    Args:
        layout: Any layout on the integer grid.
        smoothing: ``"auto"`` selects the central ``2*m*n + 1`` lags for
            coprime layouts (the guaranteed hole-free span) and the full
            consecutive run otherwise; ``"full"`` always uses the full run.

    Returns:
        The coarray with lags in units of ``layout.d``.
    """
    if smoothing not in ("auto", "full"):
        raise ValueError(f"unknown smoothing mode {smoothing!r}")
    g = np.asarray(layout.grid, dtype=int)
    diffs = (g[:, None] - g[None, :]).ravel()
    lags, counts = np.unique(diffs, return_counts=True)

    present = set(int(v) for v in lags)
    if 0 not in present:
        raise ValueError("difference set does not contain lag 0")
    half = 0
    while (half + 1) in present and -(half + 1) in present:
        half += 1
    consecutive = tuple(range(-half, half + 1))

    segment = consecutive
    if smoothing == "auto" and layout.kind == "coprime" and layout.coprime is not None:
        mn = layout.coprime.m * layout.coprime.n
        if half < mn:
            raise AssertionError(
                f"coprime coarray run [{-half}, {half}] shorter than expected 2*{mn}+1"
            )
        segment = tuple(range(-mn, mn + 1))

    return CoarrayLayout(
        lags=tuple(int(v) for v in lags),
        multiplicity=tuple(int(c) for c in counts),
        consecutive_segment=consecutive,
        smoothing_segment=segment,
        unit=layout.d,
    )


def max_targets(m: int, n: int) -> tuple[int, int]:
    """Capacity of the decoupled-coarray and subarray estimators.

    The decoupled route spends one virtual component per target plus one per
    unordered target pair, so the largest feasible count K_v satisfies
    K_v (K_v + 1) / 2 <= m*n + 1.  The subarray route is limited to
    K_p = min(m, n).
    """
    params_check = math.gcd(m, n)
    if params_check != 1 or m == n:
        raise ValueError(f"m={m}, n={n} must be coprime and distinct")
    budget = m * n + 1
    k_v = (math.isqrt(8 * budget + 1) - 1) // 2
    k_p = min(m, n)
    return k_v, k_p

"""Scenario files: geometry, targets, and synthesis settings in one JSON."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from .channel import SnapshotSet, Target, TargetSet, synthesize
from .geometry import CoprimeParams, SensorLayout, build_coprime_layout, build_dense_layout

__all__ = ["SPEED_OF_LIGHT", "Scenario", "default_benchmark_scenario"]

SPEED_OF_LIGHT = 299_792_458.0  # m/s


@dataclass(frozen=True)
class Scenario:
    """A complete synthetic measurement setup.

    JSON schema: ``{"M": int, "N": int, "d_mm": float and/or "freq_ghz":
    float, "targets": [{"theta_deg": float, "range_m": float}, ...],
    "T": int, "snr_db": float | null, "seed": int, "model": "exact" |
    "fresnel"}``.  When only ``freq_ghz`` is given the spacing defaults to
    a quarter wavelength; when only ``d_mm`` is given the wavelength
    defaults to four spacings.
    """

    m: int
    n: int
    d: float
    wavelength: float
    targets: TargetSet
    n_snapshots: int
    snr_db: float | None
    seed: int
    model: str = "exact"

    @property
    def params(self) -> CoprimeParams:
        return CoprimeParams(self.m, self.n, self.d, self.wavelength)

    def layout(self) -> SensorLayout:
        return build_coprime_layout(self.params)

    def dense_layout(self) -> SensorLayout:
        """Dense comparison layout with the same sensor count and spacing."""
        return build_dense_layout(self.layout().size, self.d, self.wavelength)

    def snapshots(
        self, snr_db: float | None = None, seed: int | None = None
    ) -> SnapshotSet:
        """Synthesize on the coprime layout, optionally overriding noise/seed."""
        return synthesize(
            self.layout(),
            self.targets,
            self.n_snapshots,
            self.snr_db if snr_db is None else snr_db,
            self.seed if seed is None else seed,
            self.model,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        d_mm = data.get("d_mm")
        freq_ghz = data.get("freq_ghz")
        if d_mm is None and freq_ghz is None:
            raise ValueError("scenario needs d_mm and/or freq_ghz")
        if freq_ghz is not None:
            wavelength = SPEED_OF_LIGHT / (float(freq_ghz) * 1e9)
        else:
            wavelength = 4.0 * float(d_mm) * 1e-3
        d = float(d_mm) * 1e-3 if d_mm is not None else wavelength / 4.0
        targets = TargetSet(
            tuple(
                Target.from_degrees(float(t["theta_deg"]), float(t["range_m"]))
                for t in data["targets"]
            )
        )
        snr = data.get("snr_db")
        return cls(
            m=int(data["M"]),
            n=int(data["N"]),
            d=d,
            wavelength=wavelength,
            targets=targets,
            n_snapshots=int(data.get("T", 100)),
            snr_db=None if snr is None else float(snr),
            seed=int(data.get("seed", 0)),
            model=str(data.get("model", "exact")),
        )

    def to_dict(self) -> dict:
        return {
            "M": self.m,
            "N": self.n,
            "d_mm": self.d * 1e3,
            "freq_ghz": SPEED_OF_LIGHT / self.wavelength / 1e9,
            "targets": [
                {"theta_deg": t.theta_deg, "range_m": t.r} for t in self.targets
            ],
            "T": self.n_snapshots,
            "snr_db": self.snr_db,
            "seed": self.seed,
            "model": self.model,
        }

    @classmethod
    def load(cls, path: str | Path) -> "Scenario":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")


def default_benchmark_scenario(snr_db: float | None = 10.0, seed: int = 0) -> Scenario:
    """Four-target 30 GHz setup on the (9, 11) coprime array.

    Two of the targets share the 30-degree angle and differ only in range,
    which is what makes the scenario a meaningful stress test.
    """
    wavelength = SPEED_OF_LIGHT / 30e9
    targets = TargetSet(
        (
            Target.from_degrees(-35.0, 25.0),
            Target.from_degrees(10.0, 30.0),
            Target.from_degrees(30.0, 20.0),
            Target.from_degrees(30.0, 40.0),
        )
    )
    return Scenario(
        m=9,
        n=11,
        d=wavelength / 4.0,
        wavelength=wavelength,
        targets=targets,
        n_snapshots=100,
        snr_db=snr_db,
        seed=seed,
        model="exact",
    )

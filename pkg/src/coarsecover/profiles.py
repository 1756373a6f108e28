"""Radius-indexed profiles shared by the group and covering layers."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field


@dataclass
class GrowthProfile:
    """Ball sizes beta(r) of a metric object, indexed by integer radius."""

    source: str
    radii: list
    sizes: list

    def __post_init__(self):
        if len(self.radii) != len(self.sizes):
            raise ValueError("radii and sizes must have equal length")
        if any(r2 <= r1 for r1, r2 in zip(self.radii, self.radii[1:])):
            raise ValueError("radii must be strictly increasing")
        if any(s2 < s1 for s1, s2 in zip(self.sizes, self.sizes[1:])):
            raise ValueError("ball sizes must be non-decreasing")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["radius", "ball_size"])
            for r, s in zip(self.radii, self.sizes):
                w.writerow([r, s])

    @classmethod
    def read_csv(cls, path, source=""):
        radii, sizes = [], []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if [h.strip() for h in header] != ["radius", "ball_size"]:
                raise ValueError(f"unexpected growth CSV header: {header}")
            for row in reader:
                radii.append(int(row[0]))
                sizes.append(int(row[1]))
        return cls(source=source or str(path), radii=radii, sizes=sizes)


@dataclass
class HyperbolicityProfile:
    """Four-point delta measured on balls of increasing radius."""

    source: str
    radii: list
    deltas: list
    sample_sizes: list = field(default_factory=list)
    quadruple_counts: list = field(default_factory=list)
    subsampled: list = field(default_factory=list)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["radius", "delta", "sample_size", "quadruples", "subsampled"])
            for k, (r, d) in enumerate(zip(self.radii, self.deltas)):
                n = self.sample_sizes[k] if self.sample_sizes else ""
                q = self.quadruple_counts[k] if self.quadruple_counts else ""
                s = int(self.subsampled[k]) if self.subsampled else ""
                w.writerow([r, d, n, q, s])

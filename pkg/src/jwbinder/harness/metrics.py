"""Detection metrics over a samples x engines verdict table.

SDR: share of samples flagged by at least ``threshold`` engines.
ADE: mean number of engines flagging a sample.
The ``combined`` variant ORs the code and data verdicts engine by engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field

VARIANTS = ("baseline", "code", "data", "all", "combined")
DEFAULT_THRESHOLD = 2


@dataclass
class DetectionMatrix:
    """``verdicts[variant][sample][engine] -> bool``; rows share one engine list."""
    engines: list[str]
    samples: list[str] = field(default_factory=list)
    verdicts: dict[str, list[list[bool]]] = field(default_factory=dict)

    def add_sample(self, name: str, rows: dict[str, dict[str, bool]]) -> None:
        """Add one sample given ``{variant: {engine: verdict}}``; missing engines count as clean."""
        for variant in rows:
            if variant not in VARIANTS:
                raise ValueError(f"unknown variant {variant!r}")
        self.samples.append(name)
        for variant, verdicts in rows.items():
            table = self.verdicts.setdefault(variant, [])
            while len(table) < len(self.samples) - 1:
                table.append([False] * len(self.engines))
            table.append([bool(verdicts.get(e, False)) for e in self.engines])
        for table in self.verdicts.values():
            while len(table) < len(self.samples):
                table.append([False] * len(self.engines))

    def with_combined(self) -> "DetectionMatrix":
        if "code" in self.verdicts and "data" in self.verdicts and "combined" not in self.verdicts:
            combined = [[c or d for c, d in zip(crow, drow)]
                        for crow, drow in zip(self.verdicts["code"], self.verdicts["data"])]
            return DetectionMatrix(self.engines, self.samples, {**self.verdicts, "combined": combined})
        return self

    @classmethod
    def from_counts(cls, counts: dict[str, list[int]], n_engines: int) -> "DetectionMatrix":
        """Matrix whose sample i is flagged by the first ``counts[variant][i]`` engines."""
        engines = [f"engine{j}" for j in range(n_engines)]
        verdicts = {}
        n = None
        for variant, row_counts in counts.items():
            if n is not None and len(row_counts) != n:
                raise ValueError("variants disagree on the number of samples")
            n = len(row_counts)
            verdicts[variant] = [[j < c for j in range(n_engines)] for c in row_counts]
        return cls(engines, [f"s{i}" for i in range(n or 0)], verdicts)


@dataclass
class Metrics:
    sdr: float          # fraction in [0, 1]
    ade: float
    samples: int

    def as_dict(self) -> dict:
        return {"sdr": self.sdr, "sdr_percent": round(100 * self.sdr, 1), "ade": self.ade,
                "samples": self.samples}


def compute_metrics(matrix: DetectionMatrix, threshold: int = DEFAULT_THRESHOLD) -> dict[str, Metrics]:
    """SDR and ADE per variant."""
    if not matrix.samples or not matrix.verdicts:
        raise ValueError("empty detection matrix")
    if threshold < 1:
        raise ValueError("threshold must be positive")
    out = {}
    for variant, rows in matrix.with_combined().verdicts.items():
        counts = [sum(row) for row in rows]
        n = len(counts)
        out[variant] = Metrics(sum(c >= threshold for c in counts) / n, sum(counts) / n, n)
    return out

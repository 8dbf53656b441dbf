"""Experiment configuration and exponent validation."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction

KINDS = ("counterexample", "boundedness", "tile-audit", "square")
MODES = ("strips", "exploratory", "sequence", "parallelogram", "linear")
MAX_SAMPLES = 16384
HOLDER_TOL = 1e-12


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """Everything a run depends on; identical configs give identical reports.

    ``exponents`` holds triples (p, q, r) with r the output exponent; a
    missing r is filled from 1/r = 1/p + 1/q.  ``mode`` selects the
    operator: equispaced strips, the exploratory strips mode that only
    reports, sequences over arbitrary intervals, parallelogram cells, or the
    linear square function (q and r unused).
    """

    kind: str = "boundedness"
    mode: str = "strips"
    samples: int = 1024
    period: int = 16
    exponents: list = field(default_factory=lambda: [[4.0, 4.0, 2.0]])
    P_values: list = field(default_factory=lambda: [8, 16, 32, 64])
    strips: dict = field(default_factory=lambda: {"a0": 0, "width": 1, "gap": 1, "n_min": -16, "n_max": 15})
    intervals: list = field(default_factory=lambda: [[-4, -3], [0, 2], [5, 6], [9, 13]])
    parallelogram: dict = field(default_factory=lambda: {
        "tan1": 1, "tan2": -3,
        "first": {"start": 0, "width": 1, "period": 2, "n_min": -4, "n_max": 4},
        "second": {"start": 0, "width": 2, "period": 3, "n_min": -4, "n_max": 4}})
    band: float | None = None
    seed: int = 0
    trials: int = 50
    collection: dict = field(default_factory=lambda: {
        "extent": 1, "spatial_depth": 3, "freq_extent": 1, "samples": 1024, "period": 8,
        "base_width": 4, "empty": False})
    theta: list = field(default_factory=lambda: [1 / 3, 1 / 3, 1 / 3])
    slope_tolerance: float = 0.1
    format: str = "json"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        extra = sorted(set(d) - known)
        if extra:
            raise ConfigError(f"unknown config keys {extra}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.samples < 2 or self.period < 1 or self.samples > MAX_SAMPLES:
            raise ConfigError(f"grid needs 2 <= samples <= {MAX_SAMPLES} and period >= 1")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if self.slope_tolerance <= 0:
            raise ConfigError("slope tolerance must be positive")
        if self.format not in ("json", "csv", "svg"):
            raise ConfigError(f"unsupported format {self.format!r}")
        self.exponents = [list(normalise_triple(t, self.mode)) for t in self.exponents]
        if self.kind in ("boundedness", "square"):
            for t in self.exponents:
                check_theorem_range(t, self.mode)
        if self.kind == "counterexample":
            P = sorted(set(int(x) for x in self.P_values))
            if len(P) < 3 or P[0] < 1:
                raise ConfigError("counterexample needs at least three positive P values")
            self.P_values = P
            if self.mode not in ("strips", "linear"):
                raise ConfigError("counterexample runs in 'strips' or 'linear' mode")
        th = [float(x) for x in self.theta]
        if len(th) != 3 or min(th) <= 0 or abs(sum(th) - 1) > 1e-12:
            raise ConfigError("theta must be three positive reals summing to 1")
        return self


def normalise_triple(t, mode: str) -> tuple[float, float, float]:
    t = list(t)
    if len(t) == 2:
        t.append(None)
    if len(t) != 3:
        raise ConfigError(f"exponent triple must have 2 or 3 entries, got {t}")
    p = float(t[0])
    q = float(t[1]) if t[1] is not None else float("inf")
    if not p > 0 or not q > 0:
        raise ConfigError(f"exponents must be positive, got {t}")
    if mode == "linear":
        return p, q, p
    inv = 1 / p + 1 / q
    r = 1 / inv if t[2] is None else float(t[2])
    if abs(1 / r - inv) > HOLDER_TOL:
        raise ConfigError(f"exponents {t} violate 1/r = 1/p + 1/q")
    return p, q, r


def dual(r: float) -> float:
    return float("inf") if r == 1 else r / (r - 1) if r > 1 else float("nan")


def check_theorem_range(t, mode: str):
    """Reject exponents outside the hypothesis of the theorem a mode exercises."""
    p, q, r = t
    if mode == "linear":
        if not 2 <= p < float("inf"):
            raise ConfigError(f"linear mode needs 2 <= p < inf, got p = {p}")
        return
    if mode == "sequence":
        if not (1 < p and 1 < q and 0 < 1 / r < 1.5):
            raise ConfigError(f"sequence mode needs 1 < p, q <= inf and 0 < 1/r < 3/2, got {t}")
        return
    if not (2 < p < float("inf") and 2 < q < float("inf")):
        raise ConfigError(f"{mode} mode needs 2 < p, q < inf, got {t}")
    if mode == "exploratory":
        return
    rp = dual(r)
    if not r > 1 or rp < 2 or rp == float("inf"):
        raise ConfigError(
            f"{mode} mode needs 2 <= r' < inf, got r' = {rp:.6g}; whether r' >= 2 is needed is an open "
            "question, so use mode 'exploratory' to report such ratios without asserting a bound")


def load_config(path: str, **overrides) -> ExperimentConfig:
    with open(path) as fh:
        d = json.load(fh)
    d.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig.from_dict(d)


def rational(x) -> Fraction:
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)

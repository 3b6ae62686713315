"""Run configuration shared by the evaluation pipeline and the CLI."""

import dataclasses
import json
from dataclasses import dataclass

from .boundedness import DEFAULT_PRUNING_FACTOR, METHODS
from .geometry import DEFAULT_DIAGONAL


@dataclass(frozen=True)
class RunConfig:
    """All tunables of one evaluation run; every field is echoed in the report.

    Thresholds ``beta_threshold``, ``c_threshold`` and ``curve_c_threshold``
    lie in (0, 1]; ``d_threshold`` lies in (0, ``target_diagonal``].
    """

    beta_threshold: float = 0.75
    c_threshold: float = 0.75
    curve_c_threshold: float = 0.75
    d_threshold: float = 0.02
    k: int = 8
    m: int = 5
    alpha: float = 0.5
    pruning_factor: float = DEFAULT_PRUNING_FACTOR
    coverage_method: str = "sinusoidal"
    coverage_spacing: str = "local"
    bounded_rule: str = "ge"
    n_samples: int = 500
    target_diagonal: float = DEFAULT_DIAGONAL
    p: int = 1
    seed: int = 0
    noise_fraction: float = 0.05
    normalize: bool = True
    point_centeredness: str = "correspondence"

    def __post_init__(self):
        for name in ("beta_threshold", "c_threshold", "curve_c_threshold"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {v}")
        if not self.target_diagonal > 0:
            raise ValueError(f"target_diagonal must be positive, got {self.target_diagonal}")
        if not 0.0 < self.d_threshold <= self.target_diagonal:
            raise ValueError(f"d_threshold must be in (0, {self.target_diagonal}], got {self.d_threshold}")
        for name, low in (("k", 2), ("m", 1), ("n_samples", 2), ("p", 1)):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < low:
                raise ValueError(f"{name} must be an integer >= {low}, got {v!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")
        if not self.pruning_factor > 0:
            raise ValueError(f"pruning_factor must be positive, got {self.pruning_factor}")
        if self.noise_fraction < 0:
            raise ValueError(f"noise_fraction must be non-negative, got {self.noise_fraction}")
        choices = {
            "coverage_method": METHODS,
            "coverage_spacing": ("local", "median"),
            "bounded_rule": ("ge", "lt"),
            "point_centeredness": ("correspondence", "pca-slab"),
        }
        for name, allowed in choices.items():
            if getattr(self, name) not in allowed:
                raise ValueError(f"{name} must be one of {allowed}, got {getattr(self, name)!r}")

    def to_dict(self):
        return dataclasses.asdict(self)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config key(s): {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise ValueError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def with_overrides(self, assignments):
        """Apply ``key=value`` strings, parsing values by the field's type."""
        types = {f.name: f.type for f in dataclasses.fields(self)}
        changes = {}
        for item in assignments:
            key, sep, raw = item.partition("=")
            key = key.strip().replace("-", "_")
            if not sep or key not in types:
                raise ValueError(f"bad override {item!r}; expected key=value with a known key")
            kind = types[key]
            if kind in (bool, "bool"):
                low = raw.strip().lower()
                if low not in ("true", "false", "1", "0", "yes", "no"):
                    raise ValueError(f"{key} expects a boolean, got {raw!r}")
                changes[key] = low in ("true", "1", "yes")
            elif kind in (int, "int"):
                changes[key] = int(raw)
            elif kind in (float, "float"):
                changes[key] = float(raw)
            else:
                changes[key] = raw.strip()
        return self.replace(**changes)

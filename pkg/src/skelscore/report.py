"""Per-element scores and the evaluation report container."""

import json
import math
from dataclasses import dataclass, field

import numpy as np

SCHEMA_VERSION = 1


@dataclass
class ElementScores:
    """Scores for a sequence of skeleton elements.

    ``values[i]`` is NaN exactly when element ``i`` is invalid, in which case
    ``reasons[i]`` says why.
    """

    values: np.ndarray
    reasons: list

    @classmethod
    def empty(cls, n):
        return cls(np.full(n, np.nan), [None] * n)

    @property
    def valid(self):
        return ~np.isnan(self.values)

    def __len__(self):
        return len(self.values)

    def invalidate(self, i, reason):
        self.values[i] = np.nan
        self.reasons[i] = reason

    def mean(self):
        v = self.values[self.valid]
        return float(v.mean()) if v.size else math.nan


def _clean(value):
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return _clean(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return None if not math.isfinite(value) else value
    return value


@dataclass
class EvaluationReport:
    """Everything one evaluation run produced.

    ``overall`` maps metric name to ``{"points": value, "curve": value}`` for the
    skeleton kinds that were evaluated; ``elements`` holds one record per
    element and metric.
    """

    config: dict
    normalization: dict
    overall: dict = field(default_factory=dict)
    elements: list = field(default_factory=list)
    curve_samples: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    # wall-clock seconds per metric; kept out of the JSON so reports stay reproducible
    timings: dict = field(default_factory=dict, repr=False)
    # in-memory results for exporters (barcodes, cross-sections); not serialized
    artifacts: dict = field(default_factory=dict, repr=False)

    def add_scores(self, metric, kind, prefix, scores):
        for i, (value, reason) in enumerate(zip(scores.values, scores.reasons)):
            valid = not math.isnan(value)
            self.elements.append(
                {
                    "element": f"{prefix}:{i}",
                    "kind": kind,
                    "metric": metric,
                    "value": float(value) if valid else None,
                    "valid": valid,
                    "reason": None if valid else (reason or "invalid"),
                }
            )

    def element_values(self, metric, kind):
        """Per-element values of one metric as an array (NaN for invalid)."""
        vals = [
            np.nan if e["value"] is None else e["value"]
            for e in self.elements
            if e["metric"] == metric and e["kind"] == kind
        ]
        return np.asarray(vals, dtype=np.float64)

    def table_row(self):
        """Overall scores formatted as ``points/curve`` pairs."""
        row = {}
        topo = self.overall.get("topology")
        if topo:
            row["topology"] = _pair(topo.get("d_bottleneck"), topo.get("d_wasserstein"))
        for metric in ("boundedness", "centeredness", "smoothness"):
            vals = self.overall.get(metric)
            if vals:
                row[metric] = _pair(vals.get("points"), vals.get("curve"))
        return row

    def to_dict(self):
        return _clean(
            {
                "schema": SCHEMA_VERSION,
                "config": self.config,
                "normalization": self.normalization,
                "overall": self.overall,
                "table_row": self.table_row(),
                "warnings": self.warnings,
                "curve_samples": self.curve_samples,
                "elements": self.elements,
            }
        )

    def to_json(self, indent=1):
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True, allow_nan=False)


def _pair(a, b):
    def fmt(v):
        if v is None or (isinstance(v, float) and not math.isfinite(v)):
            return "-"
        return f"{v:.4g}"

    return f"{fmt(a)}/{fmt(b)}"

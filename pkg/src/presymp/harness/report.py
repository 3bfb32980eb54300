"""Check reports, order estimation and serialization."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

SATURATION_FLOOR = 1e-13
ORDER_THRESHOLD = 1.9
EXACT = "exact"
CONVERGENT = "convergent"
SATURATED = "saturated"


def estimate_order(residuals, counts, floor: float = SATURATION_FLOOR, scales=None):
    """Least-squares slope of log(residual) against log(h), h = 1/count.

    Residuals below `floor` (times the matching entry of `scales`, if given)
    are treated as roundoff and dropped; with fewer than two left the result
    is the string "saturated".
    """
    r = np.abs(np.asarray(residuals, dtype=complex)).astype(float)
    c = np.asarray(counts, dtype=float)
    if r.shape != c.shape or len(r) < 2:
        raise ValueError("need matching residuals and counts on at least 2 grids")
    if np.any(c <= 0) or np.any(np.diff(c) <= 0):
        raise ValueError("counts must be positive and strictly increasing")
    lim = floor * (np.ones_like(r) if scales is None else np.maximum(np.asarray(scales, float), 1.0))
    keep = r > lim
    if keep.sum() < 2:
        return SATURATED
    x = np.log(1.0 / c[keep])
    y = np.log(r[keep])
    slope = np.polyfit(x, y, 1)[0]
    return float(slope) + 0.0


def pairwise_orders(residuals, counts) -> list:
    r = np.abs(np.asarray(residuals, dtype=complex))
    out = []
    for i in range(len(r) - 1):
        if r[i] > 0 and r[i + 1] > 0:
            out.append(float(np.log(r[i] / r[i + 1]) / np.log(counts[i + 1] / counts[i])))
        else:
            out.append(None)
    return out


def _clean(x):
    """JSON-safe, deterministic representation of extras."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in sorted(x.items(), key=lambda kv: str(kv[0]))}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": _clean(float(x.real)), "im": _clean(float(x.imag))}
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return x
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if x is None or isinstance(x, str):
        return x
    return str(x)


@dataclass
class CheckReport:
    check: str
    params: dict
    grids: list
    residuals: list
    order: object  # float, "saturated" or None for exact-class checks
    conventions: dict
    passed: bool
    residual_class: str
    tolerance: float
    normalization: dict
    wall_time: float = 0.0
    reason: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "check": self.check,
            "params": _clean(self.params),
            "grids": [int(g) for g in self.grids],
            "residuals": [_clean(float(r)) for r in self.residuals],
            "order": _clean(self.order),
            "conventions": _clean(self.conventions),
            "pass": bool(self.passed),
            "residual_class": self.residual_class,
            "tolerance": float(self.tolerance),
            "normalization": _clean(self.normalization),
            "wall_time": float(self.wall_time),
            "reason": self.reason,
            "extra": _clean(self.extra),
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CheckReport":
        return cls(check=d["check"], params=d["params"], grids=list(d["grids"]),
                   residuals=[float(r) for r in d["residuals"]], order=d["order"],
                   conventions=d["conventions"], passed=bool(d["pass"]),
                   residual_class=d["residual_class"], tolerance=float(d["tolerance"]),
                   normalization=d["normalization"], wall_time=float(d.get("wall_time", 0.0)),
                   reason=d.get("reason", ""), extra=d.get("extra", {}))

    def to_json(self, include_time: bool = True) -> str:
        d = self.to_dict()
        if not include_time:
            d.pop("wall_time")
        return json.dumps(d, sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, s: str) -> "CheckReport":
        return cls.from_dict(json.loads(s))

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if self.residual_class == CONVERGENT:
            if self.order is None:
                o = "no order"
            elif isinstance(self.order, str):
                o = self.order
            else:
                o = f"order {self.order:.3f}"
            detail = f"{o} (need >= {self.tolerance})"
        else:
            detail = f"max residual {max(self.residuals, default=0.0):.3e} (tol {self.tolerance:.1e})"
        tail = f" [{self.reason}]" if self.reason else ""
        return f"{status} {self.check}: {detail}{tail}"


CSV_FIELDS = ["check", "grid", "residual", "order", "pass", "residual_class", "tolerance",
              "s_cs", "s_q", "s_sigma"]


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for rep in reports:
        conv = rep.conventions
        for g, r in zip(rep.grids, rep.residuals):
            w.writerow([rep.check, g, repr(float(r)), rep.order, int(rep.passed),
                        rep.residual_class, rep.tolerance, conv.get("s_cs"), conv.get("s_q"),
                        conv.get("s_sigma")])
    return buf.getvalue()


def reports_to_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], sort_keys=True, indent=2)

"""MSE / R² and the ranked comparison table."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from lolfusion.errors import DegenerateDataError, EmptyInputError, InvalidInputError, ShapeError

METHOD_ORDER = ("ANFIS", "RBF", "MLP", "OWA", "KALMAN")
GROUPS = {"ANFIS": "Machine Learning", "RBF": "Machine Learning", "MLP": "Machine Learning",
          "OWA": "Data Fusion", "KALMAN": "Data Fusion"}
DISPLAY_NAMES = {"KALMAN": "Kalman Filter"}


def _pair(pred, target):
    p = np.asarray(pred, dtype=float).ravel()
    t = np.asarray(target, dtype=float).ravel()
    if p.shape != t.shape:
        raise ShapeError(f"{p.size} predictions vs {t.size} targets")
    if p.size == 0:
        raise EmptyInputError("empty series")
    return p, t


def mse(pred_series, target_series) -> float:
    p, t = _pair(pred_series, target_series)
    return float(np.mean((p - t) ** 2))


def r_squared(pred_series, target_series) -> float:
    p, t = _pair(pred_series, target_series)
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    if ss_tot == 0.0:
        raise DegenerateDataError("targets have zero variance; R^2 is undefined")
    return 1.0 - float(np.sum((p - t) ** 2)) / ss_tot


@dataclass(frozen=True)
class MethodReport:
    method: str
    mse: float
    r2: float
    rank: int = 0

    def __post_init__(self):
        if not self.mse >= 0:
            raise InvalidInputError(f"{self.method}: mse must be >= 0")
        if not self.r2 <= 1:
            raise InvalidInputError(f"{self.method}: r2 must be <= 1")

    @classmethod
    def evaluate(cls, method: str, pred_series, target_series) -> "MethodReport":
        return cls(method, mse(pred_series, target_series), r_squared(pred_series, target_series))

    def to_dict(self) -> dict:
        return {"method": self.method, "mse": self.mse, "r2": self.r2, "rank": self.rank}


def rank_methods(reports) -> list[MethodReport]:
    """Sort by MSE (ascending), then higher R², then name; assign ranks 1..N."""
    reports = list(reports)
    if not reports:
        raise EmptyInputError("no reports to rank")
    names = [r.method for r in reports]
    if len(set(names)) != len(names):
        raise InvalidInputError(f"duplicate method names in {names}")
    ordered = sorted(reports, key=lambda r: (r.mse, -r.r2, r.method))
    return [replace(r, rank=i) for i, r in enumerate(ordered, start=1)]


def format_table(ranked) -> str:
    """Aligned text table, methods grouped by family."""
    by_name = {r.method: r for r in ranked}
    order = [m for m in METHOD_ORDER if m in by_name] + sorted(set(by_name) - set(METHOD_ORDER))
    rows = []
    last_group = None
    for name in order:
        r = by_name[name]
        group = GROUPS.get(name, "")
        rows.append((group if group != last_group else "", DISPLAY_NAMES.get(name, name),
                     f"{r.mse:.4e}", f"{r.r2:.4f}", str(r.rank)))
        last_group = group
    header = ("", "Method", "MSE", "R^2", "Rank")
    widths = [max(len(row[i]) for row in rows + [header]) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def table_json(ranked) -> list[dict]:
    return [r.to_dict() for r in sorted(ranked, key=lambda r: r.rank)]

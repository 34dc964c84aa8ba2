"""Rank correlation against ground truth, importance aggregation and chart exports."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import pandas as pd

from .features import KEY_COLUMNS, WIDE_COLUMN, moving_average, unity_normalize
from .ingest import GroundTruthTable
from .labels import CLASS_NAMES, LabelTable

DISPLAY_NAMES = {
    "con1": "CON Score",
    "con2": "CON2 Score",
    "closeness": "Closeness",
    "betweenness": "Betweenness",
    "pagerank_rev": "PageRank",
    "in_degree": "In-Degree",
    "out_degree": "Out-Degree",
}


class UndefinedCorrelation(ValueError):
    """Spearman's rho is undefined because one input has constant ranks."""


# ------------------------------------------------------------ incomplete beta

def _betacf(a: float, b: float, x: float, max_iter: int = 10_000, eps: float = 1e-16) -> float:
    # modified Lentz evaluation of the continued fraction for I_x(a, b)
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = tiny if abs(d) < tiny else d
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = tiny if abs(d) < tiny else d
        c = 1.0 + aa / c
        c = tiny if abs(c) < tiny else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def log_betainc(a: float, b: float, x: float, y: float | None = None) -> float:
    """Natural log of the regularised incomplete beta ``I_x(a, b)``.

    ``y`` may pass ``1 - x`` computed without cancellation. Works in the log
    domain so results far below the double-precision range stay finite.
    """
    if y is None:
        y = 1.0 - x
    if x <= 0.0:
        return -math.inf
    if y <= 0.0:
        return 0.0
    lbeta = math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)
    if x < (a + 1.0) / (a + b + 2.0):
        return a * math.log(x) + b * math.log(y) - lbeta - math.log(a) + math.log(_betacf(a, b, x))
    log_other = b * math.log(y) + a * math.log(x) - lbeta - math.log(b) + math.log(_betacf(b, a, y))
    return math.log1p(-math.exp(log_other))


# ------------------------------------------------------------------- spearman

@dataclass(frozen=True)
class SpearmanResult:
    rho: float
    p_value: float
    log10_p: float
    n: int


def average_ranks(values) -> np.ndarray:
    return pd.Series(np.asarray(values, dtype=float)).rank(method="average").to_numpy()


def spearman(x, y) -> SpearmanResult:
    """Spearman's rho with a two-sided p-value from Student's t (n - 2 dof).

    ``log10_p`` stays accurate when ``p_value`` underflows to 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("spearman needs two 1-D vectors of equal length")
    n = x.size
    if n < 3:
        raise ValueError(f"spearman needs at least 3 observations, got {n}")
    rx, ry = average_ranks(x), average_ranks(y)
    dx, dy = rx - rx.mean(), ry - ry.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelation("rho undefined: an input has zero rank variance")
    rho = float(dx @ dy) / math.sqrt(sxx * syy)
    rho = max(-1.0, min(1.0, rho))
    if abs(abs(rho) - 1.0) < 1e-14:
        return SpearmanResult(math.copysign(1.0, rho), 0.0, -math.inf, n)
    df = n - 2
    # t^2 = df * rho^2 / (1 - rho^2)  =>  df / (df + t^2) = 1 - rho^2
    ln_p = log_betainc(df / 2.0, 0.5, 1.0 - rho * rho, rho * rho)
    return SpearmanResult(rho, math.exp(ln_p), ln_p / math.log(10.0), n)


# ---------------------------------------------------------------- correlation

@dataclass
class CorrelationRow:
    measure: str
    rho: float
    p_value: float
    log10_p: float
    n: int
    note: str = ""


@dataclass
class CorrelationReport:
    rows: list[CorrelationRow] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([vars(r) for r in self.rows],
                            columns=["measure", "rho", "p_value", "log10_p", "n", "note"])

    def ordering(self) -> list[str]:
        return [r.measure for r in self.rows if not math.isnan(r.rho)]

    def to_table(self) -> str:
        lines = [f"{'Metric':<14}  {'Correlation':>11}  {'P-Value':>12}"]
        for r in self.rows:
            name = DISPLAY_NAMES.get(r.measure, r.measure)
            if math.isnan(r.rho):
                lines.append(f"{name:<14}  {'undefined':>11}  {r.note:>12}")
                continue
            if r.p_value > 0:
                p = f"{r.p_value:.1e}"
            elif math.isinf(r.log10_p):
                p = "0"
            else:
                exp = math.floor(r.log10_p)
                p = f"{10 ** (r.log10_p - exp):.1f}e{exp}"
            lines.append(f"{name:<14}  {r.rho:>11.3f}  {p:>12}")
        return "\n".join(lines) + "\n"


def actor_totals(long: pd.DataFrame, measures=None) -> pd.DataFrame:
    """Sum each measure over all of an actor's rounds (first-appearance actor order)."""
    if measures is None:
        measures = [c for c in long.columns if c not in KEY_COLUMNS]
    return long.groupby("actor", sort=False)[list(measures)].sum()


def correlation_report(features: pd.DataFrame, truth: GroundTruthTable | Mapping[str, float],
                       measures=None) -> CorrelationReport:
    """Spearman rho of each actor-level measure against ground truth, best first.

    ``features`` is either long form (it has a ``round`` column, summed per
    actor) or already actor-indexed.
    """
    if "round" in features.columns:
        features = actor_totals(features, measures)
    if measures is None:
        measures = list(features.columns)
    scores = truth.as_dict() if isinstance(truth, GroundTruthTable) else dict(truth)
    common = [a for a in features.index if a in scores]
    if len(common) < 3:
        raise ValueError(f"only {len(common)} actors have both features and ground truth")
    target = np.array([scores[a] for a in common])
    rows = []
    for m in measures:
        x = features.loc[common, m].to_numpy(float)
        try:
            r = spearman(x, target)
            rows.append(CorrelationRow(m, r.rho, r.p_value, r.log10_p, r.n))
        except UndefinedCorrelation:
            rows.append(CorrelationRow(m, math.nan, math.nan, math.nan, len(common),
                                       "zero variance"))
    rows.sort(key=lambda r: (math.isnan(r.rho), -r.rho if not math.isnan(r.rho) else 0.0))
    return CorrelationReport(rows)


# ----------------------------------------------------------------- importance

@dataclass
class TimestepImportance:
    per_round: pd.DataFrame  # index round, one column per measure
    per_measure: pd.Series   # mean over rounds

    def to_frame(self) -> pd.DataFrame:
        return self.per_round.reset_index()


def importance_by_timestep(importances: Mapping[str, float], measures=None,
                           rounds=None) -> TimestepImportance:
    """Group ``{measure}_t{round}`` importances into a round x measure table."""
    cells: dict[tuple[str, int], list[float]] = {}
    for name, value in importances.items():
        m = WIDE_COLUMN.match(name)
        if m is None:
            raise ValueError(f"cannot parse importance column {name!r}")
        cells.setdefault((m["measure"], int(m["round"])), []).append(float(value))
    if measures is None:
        measures = list(dict.fromkeys(k[0] for k in cells))
    if rounds is None:
        rounds = sorted({k[1] for k in cells})
    table = pd.DataFrame(0.0, index=pd.Index(list(rounds), name="round"), columns=list(measures))
    for (m, r), vals in cells.items():
        if m in table.columns and r in table.index:
            table.loc[r, m] = float(np.mean(vals))
    return TimestepImportance(table, table.mean(axis=0))


# -------------------------------------------------------------------- exports

def export_plot_series(actor_features: pd.DataFrame, sort_by: str, truth=None,
                       window: int = 50, measures=None) -> pd.DataFrame:
    """Chart-ready series: actors sorted by ``sort_by`` (descending), then every
    column unity-normalised and smoothed with a trailing moving average.

    ``truth`` (actor -> score) adds the ground-truth rating as one more series.
    """
    if measures is None:
        measures = list(actor_features.columns)
    if sort_by not in measures:
        raise ValueError(f"unknown sort measure {sort_by!r}; have {list(measures)}")
    frame = actor_features[list(measures)].copy()
    if truth is not None:
        scores = truth.as_dict() if isinstance(truth, GroundTruthTable) else dict(truth)
        frame = frame[[a in scores for a in frame.index]]
        frame["truth"] = [scores[a] for a in frame.index]
    frame = frame.sort_values(sort_by, ascending=False, kind="stable")
    out = pd.DataFrame({"rank": np.arange(1, len(frame) + 1)})
    for col in frame.columns:
        out[col] = moving_average(unity_normalize(frame[col].to_numpy(float)), window)
    return out


def export_embedding_input(wide: pd.DataFrame, labels: LabelTable | Mapping[str, int]) -> pd.DataFrame:
    """Per-actor rows of unity-normalised wide features plus the class label.

    Columns are normalised over every actor in ``wide`` before unlabelled
    actors are dropped, so labels never change feature values.
    """
    mapping = labels.as_dict() if isinstance(labels, LabelTable) else dict(labels)
    if not mapping:
        raise ValueError("no labels assigned")
    if wide.empty:
        raise ValueError("no feature rows")
    out = pd.DataFrame({col: unity_normalize(wide[col].to_numpy(float)) for col in wide.columns},
                       index=wide.index)
    out = out[[a in mapping for a in out.index]]
    if out.empty:
        raise ValueError("no labelled actors among the feature rows")
    out["label"] = [CLASS_NAMES[mapping[a]] for a in out.index]
    return out.reset_index()

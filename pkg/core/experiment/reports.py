"""
Evaluation, forgetting and region-geometry reports.

Geometry quantities per surviving region:
- displacement: arccos(c_pre . c_post)
- area change %: 100 * (R_post^2 - R_pre^2) / R_pre^2, "new" when R_pre = 0
  or the region was added during finetune
- separability: mean over the other regions j of arccos(c_i . c_j) - R_i - R_j

Report files never contain wall-clock times, so identical runs write
identical files.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from core.config.models import Arm
from core.exceptions import IdMismatchError, MissingBaselineError
from core.experiment.metrics import SplitMetrics
from core.regions.geometry import angular_distance
from core.regions.types import RegionSet

PathLike = Union[str, Path]

GEOMETRY_COLUMNS = [
    "region_id", "status", "displacement", "area_change_pct", "separability_pre",
    "separability_post", "radius_pre", "radius_post",
]


@dataclass(frozen=True)
class GeometryRow:
    region_id: int
    status: str  # "kept" or "added"
    displacement: Optional[float]
    area_change_pct: Optional[float]  # None renders as "new"
    separability_pre: Optional[float]
    separability_post: Optional[float]
    radius_pre: Optional[float]
    radius_post: float


@dataclass(frozen=True)
class GeometryReport:
    rows: Tuple[GeometryRow, ...]
    set_separability_pre: Optional[float]
    set_separability_post: Optional[float]


def region_separability(region_set: RegionSet) -> Dict[int, Optional[float]]:
    """Per-region mean margin to every other region; None for a lone region."""
    if len(region_set) < 2:
        return {region.id: None for region in region_set.regions}
    centers = region_set.centers()
    radii = region_set.radii()
    angles = np.arccos(np.clip(centers @ centers.T, -1.0, 1.0))
    margins = angles - radii[:, None] - radii[None, :]
    np.fill_diagonal(margins, 0.0)
    per_region = margins.sum(axis=1) / (len(region_set) - 1)
    return {region.id: float(value) for region, value in zip(region_set.regions, per_region)}


def set_separability(region_set: RegionSet) -> Optional[float]:
    """Mean over unordered pairs of arccos(c_i . c_j) - R_i - R_j."""
    if len(region_set) < 2:
        return None
    centers = region_set.centers()
    radii = region_set.radii()
    upper = np.triu_indices(len(region_set), k=1)
    angles = np.arccos(np.clip(centers @ centers.T, -1.0, 1.0))[upper]
    margins = angles - radii[upper[0]] - radii[upper[1]]
    return float(margins.mean())


def region_geometry_report(pre: RegionSet, post: RegionSet) -> GeometryReport:
    """
    Compare region geometry before and after finetuning.

    Raises:
        IdMismatchError: If a region of ``pre`` is missing from ``post``
    """
    missing = sorted(set(pre.ids) - set(post.ids))
    if missing:
        raise IdMismatchError(f"regions {missing} exist before finetuning but not after")
    sep_pre = region_separability(pre)
    sep_post = region_separability(post)
    rows: List[GeometryRow] = []
    for region in post.regions:
        if region.id in pre.ids:
            before = pre.get(region.id)
            if before.radius > 0.0:
                area = 100.0 * (region.radius ** 2 - before.radius ** 2) / before.radius ** 2
            else:
                area = None
            rows.append(GeometryRow(
                region_id=region.id,
                status="kept",
                displacement=float(angular_distance(before.center, region.center)),
                area_change_pct=area,
                separability_pre=sep_pre[region.id],
                separability_post=sep_post[region.id],
                radius_pre=before.radius,
                radius_post=region.radius,
            ))
        else:
            rows.append(GeometryRow(
                region_id=region.id,
                status="added",
                displacement=None,
                area_change_pct=None,
                separability_pre=None,
                separability_post=sep_post[region.id],
                radius_pre=None,
                radius_post=region.radius,
            ))
    return GeometryReport(
        rows=tuple(rows),
        set_separability_pre=set_separability(pre),
        set_separability_post=set_separability(post),
    )


def _fmt(value: Optional[float], missing: str = "n/a") -> str:
    if value is None:
        return missing
    return f"{value:.6f}"


def geometry_frame(report: GeometryReport) -> pd.DataFrame:
    """Tab-friendly rendering of a geometry report."""
    records = []
    for row in report.rows:
        records.append({
            "region_id": row.region_id,
            "status": row.status,
            "displacement": _fmt(row.displacement),
            "area_change_pct": _fmt(row.area_change_pct, missing="new"),
            "separability_pre": _fmt(row.separability_pre),
            "separability_post": _fmt(row.separability_post),
            "radius_pre": _fmt(row.radius_pre),
            "radius_post": _fmt(row.radius_post),
        })
    return pd.DataFrame(records, columns=GEOMETRY_COLUMNS)


def write_geometry_tsv(report: GeometryReport, path: PathLike, adapter_norms: Optional[Dict[int, float]] = None) -> Path:
    frame = geometry_frame(report)
    if adapter_norms is not None:
        frame["adapter_delta_norm"] = [_fmt(adapter_norms.get(rid)) for rid in frame["region_id"]]
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(target, sep="\t", index=False, lineterminator="\n")
    return target


@dataclass(frozen=True)
class ForgettingRow:
    arm: Arm
    recall_before: float
    recall_after: float
    ndcg_before: float
    ndcg_after: float

    @property
    def recall_delta(self) -> float:
        return self.recall_after - self.recall_before

    @property
    def ndcg_delta(self) -> float:
        return self.ndcg_after - self.ndcg_before


def build_forgetting_rows(
    baseline: Optional[Dict[Arm, Dict[str, float]]],
    after: Dict[Arm, SplitMetrics],
) -> List[ForgettingRow]:
    """
    Pair pre-finetune S-split metrics with post-finetune ones.

    Raises:
        MissingBaselineError: If no pre-finetune metrics were recorded
    """
    if not baseline:
        raise MissingBaselineError("no pre-finetune S-split metrics; run finetune first")
    rows = []
    for arm, metrics in after.items():
        if arm not in baseline:
            raise MissingBaselineError(f"no pre-finetune metrics for arm {arm.value}")
        rows.append(ForgettingRow(
            arm=arm,
            recall_before=baseline[arm]["recall"],
            recall_after=metrics.recall,
            ndcg_before=baseline[arm]["ndcg"],
            ndcg_after=metrics.ndcg,
        ))
    return rows


@dataclass
class EvalReport:
    """Metrics per arm and split, plus forgetting and geometry sections."""

    cutoff: int
    metrics: Dict[Arm, Dict[str, SplitMetrics]] = field(default_factory=dict)
    forgetting: List[ForgettingRow] = field(default_factory=list)
    geometry: Dict[Arm, GeometryReport] = field(default_factory=dict)
    wall_clock_seconds: Optional[float] = None  # console only, never written

    def add(self, arm: Arm, split: str, metrics: SplitMetrics) -> None:
        self.metrics.setdefault(arm, {})[split] = metrics

    def to_kv(self) -> str:
        """Flat ``key = value`` rendering, sorted for stable output."""
        k = self.cutoff
        values: Dict[str, str] = {}
        for arm, splits in self.metrics.items():
            for split, m in splits.items():
                values[f"{arm.value}.{split}.recall_at_{k}"] = f"{m.recall:.10f}"
                values[f"{arm.value}.{split}.ndcg_at_{k}"] = f"{m.ndcg:.10f}"
                values[f"{arm.value}.{split}.count"] = str(m.count)
        for row in self.forgetting:
            values[f"{row.arm.value}.forgetting.recall_delta"] = f"{row.recall_delta:.10f}"
            values[f"{row.arm.value}.forgetting.ndcg_delta"] = f"{row.ndcg_delta:.10f}"
        for arm, geometry in self.geometry.items():
            values[f"{arm.value}.geometry.regions"] = str(len(geometry.rows))
            values[f"{arm.value}.geometry.separability_pre"] = _fmt(geometry.set_separability_pre)
            values[f"{arm.value}.geometry.separability_post"] = _fmt(geometry.set_separability_post)
        return "".join(f"{key} = {values[key]}\n" for key in sorted(values))

    def to_text(self) -> str:
        """Human-readable report."""
        k = self.cutoff
        lines = [f"Evaluation report (cutoff {k})", ""]
        header = f"{'arm':<16}{'split':<7}{'count':>8}{f'R@{k}':>12}{f'N@{k}':>12}"
        lines += [header, "-" * len(header)]
        for arm, splits in self.metrics.items():
            for split in sorted(splits):
                m = splits[split]
                lines.append(f"{arm.value:<16}{split:<7}{m.count:>8}{m.recall:>12.6f}{m.ndcg:>12.6f}")
        if self.forgetting:
            lines += ["", "Forgetting on the S split (after - before)"]
            header = f"{'arm':<16}{'R before':>12}{'R after':>12}{'dR':>12}{'N before':>12}{'N after':>12}{'dN':>12}"
            lines += [header, "-" * len(header)]
            for row in self.forgetting:
                lines.append(
                    f"{row.arm.value:<16}{row.recall_before:>12.6f}{row.recall_after:>12.6f}"
                    f"{row.recall_delta:>12.6f}{row.ndcg_before:>12.6f}{row.ndcg_after:>12.6f}"
                    f"{row.ndcg_delta:>12.6f}"
                )
        for arm, geometry in self.geometry.items():
            lines += ["", f"Region geometry ({arm.value})"]
            lines.append(geometry_frame(geometry).to_string(index=False))
            lines.append(
                f"set separability: {_fmt(geometry.set_separability_pre)} -> "
                f"{_fmt(geometry.set_separability_post)}"
            )
        return "\n".join(lines) + "\n"

    def write(self, reports_dir: PathLike) -> Dict[str, Path]:
        out = Path(reports_dir)
        out.mkdir(parents=True, exist_ok=True)
        text_path = out / "eval_report.txt"
        kv_path = out / "eval_report.kv"
        text_path.write_text(self.to_text(), encoding="utf-8")
        kv_path.write_text(self.to_kv(), encoding="utf-8")
        paths = {"text": text_path, "kv": kv_path}
        for arm, geometry in self.geometry.items():
            paths[f"geometry_{arm.value}"] = write_geometry_tsv(geometry, out / f"geometry_{arm.value}.tsv")
        return paths


def metrics_to_kv(metrics: Dict[Arm, Dict[str, float]]) -> str:
    return "".join(
        f"{arm.value}.{name} = {value:.17g}\n"
        for arm in sorted(metrics, key=lambda a: a.value)
        for name, value in sorted(metrics[arm].items())
    )


def metrics_from_kv(text: str) -> Dict[Arm, Dict[str, float]]:
    parsed: Dict[Arm, Dict[str, float]] = {}
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        arm, name = key.split(".", 1)
        parsed.setdefault(Arm(arm), {})[name] = float(value)
    return parsed


def sweep_frame(rows: Sequence[Tuple[str, str, EvalReport]]) -> pd.DataFrame:
    """One row per (swept value, arm) with S and T metrics."""
    records = []
    for param, value, report in rows:
        k = report.cutoff
        for arm, splits in report.metrics.items():
            record = {"param": param, "value": value, "arm": arm.value}
            for name in ("S", "T"):
                if name in splits:
                    record[f"{name}_recall_at_{k}"] = f"{splits[name].recall:.10f}"
                    record[f"{name}_ndcg_at_{k}"] = f"{splits[name].ndcg:.10f}"
            records.append(record)
    return pd.DataFrame(records)



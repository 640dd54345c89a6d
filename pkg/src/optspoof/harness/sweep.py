"""Parameter sweeps: one DET curve and divergence report per axis value."""

from __future__ import annotations

import enum
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .._validation import ValidationError, check_count
from ..attack import synthesize_optimal
from ..channel import channels_for
from ..detect import Detector, estimate_det
from ..scenario import Scenario, Signaling, load_scenario
from .io import atomic_write_text, write_det_csv, write_json, write_record_csv
from .svg import det_svg


class Axis(str, enum.Enum):
    N = "n"
    SNR_SB = "snr_sb"
    SNR_SE = "snr_se"
    POSITIONS = "positions"
    SIGNALING = "signaling"


_POSITION_KEYS = {"tau_bob", "tau_eve", "tau_forged", "label"}


def _check_value(axis: Axis, value):
    if axis is Axis.N:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError("values", f"n sweep needs integers, got {value!r}")
        return check_count(value, "n")
    if axis in (Axis.SNR_SB, Axis.SNR_SE):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError("values", f"SNR sweep needs numbers, got {value!r}")
        return float(value)
    if axis is Axis.SIGNALING:
        try:
            return Signaling(value)
        except ValueError:
            raise ValidationError("values", f"unknown signaling {value!r}") from None
    if not isinstance(value, dict) or not ({"tau_eve", "tau_forged"} & set(value)):
        raise ValidationError("values", "positions sweep needs mappings with tau_eve/tau_forged")
    extra = set(value) - _POSITION_KEYS
    if extra:
        raise ValidationError("values", f"unknown positions key {sorted(extra)[0]!r}")
    return dict(value)


@dataclass(frozen=True)
class SweepSpec:
    """A base scenario swept along one axis.

    ``positions`` values are mappings holding any of ``tau_bob``,
    ``tau_eve``, ``tau_forged`` and an optional ``label``.
    """

    base: Scenario
    axis: Axis
    values: list
    detector: Detector = Detector.LRT
    outputs: Path = Path("results")
    name: str = "sweep"
    thresholds: str = "auto"
    _checked: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis(self.axis))
        object.__setattr__(self, "detector", Detector(self.detector))
        object.__setattr__(self, "outputs", Path(self.outputs))
        if not isinstance(self.values, (list, tuple)) or len(self.values) == 0:
            raise ValidationError("values", "values must be a non-empty list")
        if self.thresholds not in ("auto", "quantile"):
            raise ValidationError("thresholds", f"unknown threshold mode {self.thresholds!r}")
        object.__setattr__(self, "_checked", [_check_value(self.axis, v) for v in self.values])

    def scenario_at(self, i: int) -> Scenario:
        v = self._checked[i]
        if self.axis is Axis.N:
            return self.base.replace(n=v)
        if self.axis is Axis.SNR_SB:
            return self.base.replace(snr_sb_db=v)
        if self.axis is Axis.SNR_SE:
            return self.base.replace(snr_se_db=v)
        if self.axis is Axis.SIGNALING:
            return self.base.replace(signaling=v)
        return self.base.replace(**{k: v[k] for k in v if k != "label"})

    def label_at(self, i: int) -> str:
        v = self._checked[i]
        if self.axis is Axis.POSITIONS:
            return str(v.get("label", f"pair{i}"))
        if self.axis is Axis.SIGNALING:
            return v.value
        unit = "" if self.axis is Axis.N else " dB"
        return f"{self.axis.value}={v:g}{unit}"


def load_sweep(path, *, outputs=None, seed=None, trials=None) -> SweepSpec:
    """Read a sweep document.

    ``base`` is either an inline scenario mapping or a path relative to the
    sweep file. ``outputs`` defaults to a directory named after the file.
    """
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ValidationError("<file>", f"cannot parse {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError("<root>", "sweep document must be a mapping")
    unknown = sorted(set(doc) - {"base", "axis", "values", "detector", "outputs", "name", "thresholds"})
    if unknown:
        raise ValidationError(unknown[0], f"unknown sweep key {unknown[0]!r}")
    for key in ("base", "axis", "values"):
        if key not in doc:
            raise ValidationError(key, f"missing required key {key!r}")
    base = doc["base"]
    if isinstance(base, str):
        base = load_scenario(path.parent / base)
    else:
        base = Scenario.from_dict(base)
    changes = {k: v for k, v in (("seed", seed), ("trials", trials)) if v is not None}
    if changes:
        base = base.replace(**changes)
    try:
        axis = Axis(doc["axis"])
        detector = Detector(doc.get("detector", "lrt"))
    except ValueError as exc:
        raise ValidationError("axis", str(exc)) from None
    name = str(doc.get("name", path.stem))
    out = outputs if outputs is not None else doc.get("outputs", Path("results") / name)
    return SweepSpec(base=base, axis=axis, values=doc["values"], detector=detector,
                     outputs=Path(out), name=name, thresholds=doc.get("thresholds", "auto"))


def run_point(scenario: Scenario, detector, out_dir: Path, stem: str, *,
              thresholds="auto", threads=1, label=None):
    """DET + report for one scenario, persisted as CSV/SVG. Returns (curve, report, files)."""
    A, F = channels_for(scenario)
    policy, feas = synthesize_optimal(A, F, scenario)
    curve, report = estimate_det(scenario, detector, policy, thresholds=thresholds, threads=threads)
    out_dir = Path(out_dir)
    files = {
        "csv": write_det_csv(curve, out_dir / f"{stem}.csv").name,
        "report": write_record_csv(
            {**report.as_record(), "feasible": feas.feasible, "margin": feas.margin},
            out_dir / f"{stem}_report.csv").name,
        "svg": out_dir / f"{stem}.svg",
    }
    atomic_write_text(files["svg"], det_svg([(label or stem, curve)], title=stem))
    files["svg"] = files["svg"].name
    return curve, report, feas, files


def run_sweep(spec: SweepSpec, threads: int = 1, strict: bool = False) -> dict:
    """Run every sweep point, recording failures instead of aborting.

    Points run in a thread pool; each writes its own files atomically and
    the manifest is written last.
    """
    out = spec.outputs
    out.mkdir(parents=True, exist_ok=True)

    def one(i):
        entry = {"index": i, "label": spec.label_at(i), "value": _jsonable(spec.values[i])}
        stem = f"{spec.name}_{i:02d}"
        try:
            scenario = spec.scenario_at(i)
            entry["scenario"] = scenario.to_dict()
            curve, report, feas, files = run_point(
                scenario, spec.detector, out, stem, thresholds=spec.thresholds, label=entry["label"])
            if strict and not feas.feasible:
                raise ValidationError("feasibility", f"infeasible attack (margin {feas.margin:.6g})")
            entry.update(status="ok", files=files, report=report.as_record(),
                         feasible=feas.feasible, margin=feas.margin)
            return entry, curve
        except Exception as exc:  # noqa: BLE001 - recorded per point, sweep continues
            entry.update(status="error", error=f"{type(exc).__name__}: {exc}",
                         traceback=traceback.format_exc(limit=3))
            return entry, None

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(len(spec.values))))
    else:
        results = [one(i) for i in range(len(spec.values))]

    curves = [(e["label"], c) for e, c in results if c is not None]
    combined = None
    if curves:
        combined = f"{spec.name}.svg"
        atomic_write_text(out / combined, det_svg(curves, title=spec.name))
    manifest = {
        "name": spec.name,
        "axis": spec.axis.value,
        "detector": spec.detector.value,
        "base": spec.base.to_dict(),
        "combined_svg": combined,
        "points": [e for e, _ in results],
    }
    write_json(manifest, out / "manifest.json")
    return manifest


def _jsonable(v):
    if isinstance(v, enum.Enum):
        return v.value
    return v


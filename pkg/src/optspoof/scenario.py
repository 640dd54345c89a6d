"""Experiment scenarios: physical parameters, delays and simulation controls."""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from ._validation import (
    ValidationError,
    check_count,
    check_delays,
    check_positive,
    normalize_delays,
)

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# WGS-84
_WGS84_A = 6_378_137.0
_WGS84_F = 1 / 298.257223563
_WGS84_E2 = _WGS84_F * (2 - _WGS84_F)


class ScenarioError(ValidationError):
    """A scenario file or dictionary failed to parse or validate."""


class Signaling(str, enum.Enum):
    GAUSSIAN = "gaussian"
    BPSK = "bpsk"


def snr_db_to_variance(snr_db: float, mx: float) -> float:
    """Per-component noise variance giving ``mx / (2 sigma^2)`` = ``snr_db``."""
    return mx / (2.0 * 10.0 ** (snr_db / 10.0))


def variance_to_snr_db(variance: float, mx: float) -> float:
    return 10.0 * math.log10(mx / (2.0 * variance))


@dataclass(frozen=True)
class Scenario:
    """All physical parameters of one spoofing experiment.

    Noise variances are per real component: the complex noise at Bob has
    covariance ``2 * sigma_b2 * I``. Delay vectors are integer sample counts
    and are shifted so that their minimum is zero.

    ``tau_forged`` is the delay pattern Eve wants Bob to observe; the
    legitimate reference channel used by every analysis (the ``A`` matrix)
    is built from it, since the attack is judged against the authentic signal
    Bob would receive at the forged position. ``tau_bob`` only enters the
    common padded length.
    """

    m: int
    n: int
    mx: float
    sigma_b2: float
    sigma_bt2: float
    sigma_e2: float
    tau_bob: tuple[int, ...]
    tau_eve: tuple[int, ...]
    tau_forged: tuple[int, ...]
    signaling: Signaling = Signaling.GAUSSIAN
    seed: int = 0
    trials: int = 10_000

    def __post_init__(self):
        check_count(self.m, "m")
        check_count(self.n, "n")
        check_count(self.trials, "trials")
        for name in ("mx", "sigma_b2", "sigma_bt2", "sigma_e2"):
            object.__setattr__(self, name, check_positive(getattr(self, name), name))
        for name in ("tau_bob", "tau_eve", "tau_forged"):
            object.__setattr__(self, name, check_delays(getattr(self, name), self.m, name))
        try:
            object.__setattr__(self, "signaling", Signaling(self.signaling))
        except ValueError:
            raise ScenarioError(
                "signaling", f"signaling must be 'gaussian' or 'bpsk', got {self.signaling!r}"
            ) from None
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise ScenarioError("seed", f"seed must be an integer, got {self.seed!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ScenarioError("seed", "seed must fit in an unsigned 64-bit integer")
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def delta_b(self) -> int:
        return max(self.tau_bob)

    @property
    def delta_e(self) -> int:
        return max(self.tau_eve)

    @property
    def delta_f(self) -> int:
        return max(self.tau_forged)

    @property
    def padded_length(self) -> int:
        """Common observation length ``n + max(delta_b, delta_e, delta_f)``."""
        return self.n + max(self.delta_b, self.delta_e, self.delta_f)

    @property
    def snr_sb_db(self) -> float:
        return variance_to_snr_db(self.sigma_b2, self.mx)

    @property
    def snr_se_db(self) -> float:
        return variance_to_snr_db(self.sigma_e2, self.mx)

    def replace(self, **changes) -> "Scenario":
        """Copy with fields changed; ``snr_sb_db``/``snr_se_db`` are accepted too."""
        mx = changes.get("mx", self.mx)
        if "snr_sb_db" in changes:
            changes["sigma_b2"] = snr_db_to_variance(changes.pop("snr_sb_db"), mx)
        if "snr_se_db" in changes:
            changes["sigma_e2"] = snr_db_to_variance(changes.pop("snr_se_db"), mx)
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, cfg: dict) -> "Scenario":
        return _scenario_from_dict(cfg)

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "mx": self.mx,
            "sigma_b2": self.sigma_b2,
            "sigma_bt2": self.sigma_bt2,
            "sigma_e2": self.sigma_e2,
            "tau_bob": list(self.tau_bob),
            "tau_eve": list(self.tau_eve),
            "tau_forged": list(self.tau_forged),
            "signaling": self.signaling.value,
            "seed": self.seed,
            "trials": self.trials,
        }


@dataclass(frozen=True)
class PositionSpec:
    """ECEF geometry (meters) from which integer sample delays are derived."""

    receiver_ecef: tuple[float, float, float]
    attacker_ecef: tuple[float, float, float]
    sv_ecef: tuple[tuple[float, float, float], ...]
    sample_rate: float
    forged_ecef: tuple[float, float, float] | None = field(default=None)

    def __post_init__(self):
        check_positive(self.sample_rate, "sample_rate")
        svs = np.asarray(self.sv_ecef, dtype=float)
        if svs.ndim != 2 or svs.shape[1] != 3 or svs.shape[0] < 1:
            raise ScenarioError("svs", "svs must be a non-empty list of 3-vectors")
        for name in ("receiver_ecef", "attacker_ecef"):
            if np.asarray(getattr(self, name), dtype=float).shape != (3,):
                raise ScenarioError(name, f"{name} must be a 3-vector")
        if self.forged_ecef is not None and np.asarray(self.forged_ecef, dtype=float).shape != (3,):
            raise ScenarioError("forged_ecef", "forged_ecef must be a 3-vector")
        if len(np.unique(svs, axis=0)) != len(svs):
            raise ScenarioError("svs", "SV positions must be distinct")

    @property
    def m(self) -> int:
        return len(self.sv_ecef)


def geodetic_to_ecef(lat_deg: float, lon_deg: float, alt_m: float = 0.0) -> tuple[float, float, float]:
    """WGS-84 geodetic coordinates to ECEF meters."""
    lat, lon = math.radians(lat_deg), math.radians(lon_deg)
    sin_lat = math.sin(lat)
    prime_vertical = _WGS84_A / math.sqrt(1 - _WGS84_E2 * sin_lat**2)
    x = (prime_vertical + alt_m) * math.cos(lat) * math.cos(lon)
    y = (prime_vertical + alt_m) * math.cos(lat) * math.sin(lon)
    z = (prime_vertical * (1 - _WGS84_E2) + alt_m) * sin_lat
    return (x, y, z)


def range_delays(point, sv_ecef, sample_rate: float) -> tuple[int, ...]:
    """Integer sample delays from ``point`` to each SV, shifted to min 0."""
    svs = np.asarray(sv_ecef, dtype=float)
    ranges = np.linalg.norm(svs - np.asarray(point, dtype=float), axis=1)
    return normalize_delays(np.rint(ranges / SPEED_OF_LIGHT * sample_rate).astype(np.int64))


def delays_from_positions(spec: PositionSpec) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Return ``(tau_bob, tau_eve)`` for the receiver and attacker positions."""
    return (
        range_delays(spec.receiver_ecef, spec.sv_ecef, spec.sample_rate),
        range_delays(spec.attacker_ecef, spec.sv_ecef, spec.sample_rate),
    )


_REQUIRED = ("m", "n", "mx", "sigma_bt2", "signaling", "seed", "trials")
_KNOWN = set(_REQUIRED) | {
    "sigma_b2", "snr_sb_db", "sigma_e2", "snr_se_db",
    "tau_bob", "tau_eve", "tau_forged", "positions", "name",
}


def _positions_from_dict(block: dict) -> PositionSpec:
    if not isinstance(block, dict):
        raise ScenarioError("positions", "positions must be a mapping")
    missing = [k for k in ("receiver", "attacker", "svs", "sample_rate") if k not in block]
    if missing:
        raise ScenarioError("positions", f"positions block is missing {', '.join(missing)}")
    try:
        return PositionSpec(
            receiver_ecef=tuple(float(v) for v in block["receiver"]),
            attacker_ecef=tuple(float(v) for v in block["attacker"]),
            sv_ecef=tuple(tuple(float(v) for v in sv) for sv in block["svs"]),
            sample_rate=float(block["sample_rate"]),
            forged_ecef=(
                tuple(float(v) for v in block["forged"]) if "forged" in block else None
            ),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ScenarioError("positions", f"malformed positions block: {exc}") from None


def _scenario_from_dict(cfg: dict) -> Scenario:
    if not isinstance(cfg, dict):
        raise ScenarioError("<root>", "scenario document must be a mapping")
    unknown = sorted(set(cfg) - _KNOWN)
    if unknown:
        raise ScenarioError(unknown[0], f"unknown scenario key {unknown[0]!r}")
    for key in _REQUIRED:
        if key not in cfg:
            raise ScenarioError(key, f"missing required key {key!r}")

    def exclusive(var_key, snr_key):
        if (var_key in cfg) == (snr_key in cfg):
            raise ScenarioError(var_key, f"exactly one of {var_key!r} or {snr_key!r} is required")
        if var_key in cfg:
            return cfg[var_key]
        return snr_db_to_variance(float(cfg[snr_key]), float(cfg["mx"]))

    check_positive(cfg["mx"], "mx")
    sigma_b2 = exclusive("sigma_b2", "snr_sb_db")
    sigma_e2 = exclusive("sigma_e2", "snr_se_db")

    taus = {}
    if "positions" in cfg:
        for key in ("tau_bob", "tau_eve"):
            if key in cfg:
                raise ScenarioError(key, f"{key} conflicts with the positions block")
        spec = _positions_from_dict(cfg["positions"])
        if spec.m != cfg["m"]:
            raise ScenarioError("positions", f"positions lists {spec.m} SVs but m={cfg['m']}")
        taus["tau_bob"], taus["tau_eve"] = delays_from_positions(spec)
        if spec.forged_ecef is not None:
            if "tau_forged" in cfg:
                raise ScenarioError("tau_forged", "tau_forged conflicts with positions.forged")
            taus["tau_forged"] = range_delays(spec.forged_ecef, spec.sv_ecef, spec.sample_rate)
    for key in ("tau_bob", "tau_eve", "tau_forged"):
        if key not in taus:
            if key not in cfg:
                raise ScenarioError(key, f"missing required key {key!r}")
            taus[key] = cfg[key]

    return Scenario(
        m=cfg["m"],
        n=cfg["n"],
        mx=cfg["mx"],
        sigma_b2=sigma_b2,
        sigma_bt2=cfg["sigma_bt2"],
        sigma_e2=sigma_e2,
        signaling=cfg["signaling"],
        seed=cfg["seed"],
        trials=cfg["trials"],
        **taus,
    )


def load_scenario(path) -> Scenario:
    """Parse a YAML (or JSON) scenario document."""
    path = Path(path)
    try:
        cfg = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ScenarioError("<file>", f"cannot parse {path}: {exc}") from None
    return Scenario.from_dict(cfg)


def dump_scenario(scenario: Scenario, path=None) -> str:
    text = yaml.safe_dump(scenario.to_dict(), sort_keys=False)
    if path is not None:
        Path(path).write_text(text)
    return text

"""Scenario configuration, named presets and the flat ``key = value`` format."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace

from . import noise as nm
from .adversary import AttackStrategy
from .errors import ConfigError, InvalidArgument
from .protocol import NOISE_WINDOW, PhaseAlphabet, SessionConfig

U64_MAX = 2 ** 64 - 1


@dataclass(frozen=True)
class ScenarioConfig:
    session: SessionConfig = field(default_factory=SessionConfig)
    attack: AttackStrategy = field(default_factory=AttackStrategy)
    trials: int = 10_000
    master_seed: int | None = None
    window_deltas: tuple = (NOISE_WINDOW, math.pi / 16, math.pi / 4)
    fringe_points: int = 16
    fringe_samples: int = 100_000
    windows_for_sigma: int = 50

    def __post_init__(self):
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials", f"must be an integer >= 1, got {self.trials!r}")
        if self.master_seed is not None and not (0 <= self.master_seed <= U64_MAX):
            raise ConfigError("master_seed", "must be an unsigned 64-bit integer")
        deltas = tuple(float(d) for d in self.window_deltas)
        if not deltas or any(not (0.0 < d <= math.pi) for d in deltas):
            raise ConfigError("window_deltas", "need at least one window, each in (0, pi]")
        object.__setattr__(self, "window_deltas", deltas)
        if self.fringe_points < 8:
            raise ConfigError("fringe_points", f"must be >= 8, got {self.fringe_points}")
        if self.fringe_samples < 100:
            raise ConfigError("fringe_samples", f"must be >= 100, got {self.fringe_samples}")
        if self.windows_for_sigma < 1:
            raise ConfigError("windows_for_sigma", f"must be >= 1, got {self.windows_for_sigma}")

    def with_seed(self, seed: int) -> ScenarioConfig:
        return replace(self, master_seed=seed)


def _preset(**overrides) -> dict:
    base = {
        "alphabet_size": 4,
        "pairs_per_symbol": 10_000,
        "depolarizing_p": 0.01,
        "shield_dephasing_q": 0.0,
        "source_visibility": 1.0,
        "dark_count": 0.03,
        "efficiency": 1.0,
        "shield_db": 45.0,
        "attack": "None",
        "basis_policy": "none",
        "trials": 10_000,
        "master_seed": "none",
        "window_deltas": f"{NOISE_WINDOW!r}, {math.pi / 16!r}, {math.pi / 4!r}",
        "fringe_points": 16,
        "fringe_samples": 100_000,
        "windows_for_sigma": 50,
    }
    base.update(overrides)
    return {k: str(v) for k, v in base.items()}


PRESETS = {
    "default-5.1": _preset(),
    # Same channel as default-5.1; named for the coherence-visibility target.
    "paper-visibility": _preset(),
    # Shield dephasing calibrated so the transmitted pair has negativity 0.86.
    "paper-negativity": _preset(shield_dephasing_q=0.0631),
    "noiseless": _preset(depolarizing_p=0.0, dark_count=0.0),
}

KEYS = tuple(PRESETS["default-5.1"])

_PI_FORMS = (
    (re.compile(r"^pi/(\d+)$"), lambda m: math.pi / int(m.group(1))),
    (re.compile(r"^([-+0-9.eE]+)\s*\*?\s*pi$"), lambda m: float(m.group(1)) * math.pi),
)


def _parse_angle(text: str) -> float:
    text = text.strip()
    for pattern, conv in _PI_FORMS:
        m = pattern.match(text)
        if m:
            return conv(m)
    return float(text)


def _int(key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {text!r}") from None


def _float(key, text):
    try:
        val = float(text)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {text!r}") from None
    if math.isnan(val):
        raise ConfigError(key, "NaN is not allowed")
    return val


def _prob(key, text):
    val = _float(key, text)
    if not 0.0 <= val <= 1.0:
        raise ConfigError(key, f"must lie in [0, 1], got {val!r}")
    return val


def from_items(items: dict, preset: str = "default-5.1") -> ScenarioConfig:
    """Build a config from string items, filling gaps from ``preset``."""
    if preset not in PRESETS:
        raise ConfigError("preset", f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    unknown = sorted(set(items) - set(KEYS))
    if unknown:
        raise ConfigError(unknown[0], "unknown configuration key")
    raw = dict(PRESETS[preset])
    raw.update({k: str(v).strip() for k, v in items.items()})

    noise = nm.NoiseSpec(_prob("depolarizing_p", raw["depolarizing_p"]),
                         _prob("shield_dephasing_q", raw["shield_dephasing_q"]),
                         _prob("source_visibility", raw["source_visibility"]))
    detector = nm.DetectorSpec(_prob("dark_count", raw["dark_count"]), _prob("efficiency", raw["efficiency"]))
    shield_db = _float("shield_db", raw["shield_db"])
    if shield_db < 0:
        raise ConfigError("shield_db", f"must be >= 0, got {shield_db!r}")
    try:
        alphabet = PhaseAlphabet(_int("alphabet_size", raw["alphabet_size"]))
    except InvalidArgument as exc:
        raise ConfigError("alphabet_size", str(exc)) from None
    try:
        session = SessionConfig(alphabet, _int("pairs_per_symbol", raw["pairs_per_symbol"]), noise, detector,
                                nm.ShieldSpec(shield_db))
    except InvalidArgument as exc:
        raise ConfigError("pairs_per_symbol", str(exc)) from None

    policy = raw["basis_policy"]
    policy = None if policy.lower() == "none" else policy
    if raw["attack"] == "InterceptResend" and policy is None:
        policy = "RandomEquatorial"
    try:
        attack = AttackStrategy(raw["attack"], policy)
    except InvalidArgument as exc:
        key = "attack" if raw["attack"] not in ("None", "PassiveTap", "InterceptResend", "UniversalClone") else "basis_policy"
        raise ConfigError(key, str(exc)) from None

    seed = raw["master_seed"]
    seed = None if seed.lower() == "none" else _int("master_seed", seed)
    try:
        deltas = tuple(_parse_angle(t) for t in raw["window_deltas"].split(",") if t.strip())
    except ValueError:
        raise ConfigError("window_deltas", f"cannot parse {raw['window_deltas']!r}") from None
    return ScenarioConfig(
        session=session,
        attack=attack,
        trials=_int("trials", raw["trials"]),
        master_seed=seed,
        window_deltas=deltas,
        fringe_points=_int("fringe_points", raw["fringe_points"]),
        fringe_samples=_int("fringe_samples", raw["fringe_samples"]),
        windows_for_sigma=_int("windows_for_sigma", raw["windows_for_sigma"]),
    )


def to_items(cfg: ScenarioConfig) -> dict:
    """Flat string items; floats use repr so parsing them back is exact."""
    s = cfg.session
    return {
        "alphabet_size": str(s.alphabet.size),
        "pairs_per_symbol": str(s.pairs_per_symbol),
        "depolarizing_p": repr(s.noise.depolarizing_p),
        "shield_dephasing_q": repr(s.noise.shield_dephasing_q),
        "source_visibility": repr(s.noise.source_visibility),
        "dark_count": repr(s.detector.dark_count_prob),
        "efficiency": repr(s.detector.efficiency),
        "shield_db": repr(s.shield.attenuation_db),
        "attack": cfg.attack.kind,
        "basis_policy": cfg.attack.basis_policy or "none",
        "trials": str(cfg.trials),
        "master_seed": "none" if cfg.master_seed is None else str(cfg.master_seed),
        "window_deltas": ", ".join(repr(d) for d in cfg.window_deltas),
        "fringe_points": str(cfg.fringe_points),
        "fringe_samples": str(cfg.fringe_samples),
        "windows_for_sigma": str(cfg.windows_for_sigma),
    }


def preset(name: str, **overrides) -> ScenarioConfig:
    return from_items({k: str(v) for k, v in overrides.items()}, preset=name)


def parse_config_text(text: str) -> tuple[dict, str]:
    """Parse ``key = value`` lines; returns (items, preset name)."""
    items = {}
    preset_name = "default-5.1"
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "preset":
            preset_name = value
            continue
        if key in items:
            raise ConfigError(key, f"duplicate key on line {lineno}")
        items[key] = value
    return items, preset_name


def load_config(path, preset_override: str | None = None) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        items, name = parse_config_text(fh.read())
    return from_items(items, preset_override or name)


def format_config(cfg: ScenarioConfig) -> str:
    return "".join(f"{k} = {v}\n" for k, v in to_items(cfg).items())

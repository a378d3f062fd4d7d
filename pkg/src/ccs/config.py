"""Flat ``section.key=value`` configuration.

Every key can come from a config file or from a CLI flag of the same name
(``--ccs.beta 0.6``); flags win. Unknown keys and unparsable values raise
:class:`ConfigError`.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Mapping, Optional

from .congruence import DEFAULT_TAU, YellowRule
from .consensus import ConfigError, ConsensusConfig, KappaMode
from .metrics import MetricConfig
from .synthetic import DetectorProfile, SceneSpec

DEFAULT_SEEDS = (15, 33, 55, 101, 150)

PROFILE_A = DetectorProfile(loc_jitter_sigma=1.0, miss_prob=0.05, fp_rate=0.1)
PROFILE_B = DetectorProfile(loc_jitter_sigma=8.0, miss_prob=0.2, fp_rate=1.0)


def _optional_int(s: str) -> Optional[int]:
    return None if s.strip().lower() in ("", "none", "auto") else int(s)


def _seeds(s: str) -> tuple[int, ...]:
    return tuple(int(p) for p in s.replace(" ", "").split(",") if p)


def _profile_keys(prefix: str) -> dict[str, Callable[[str], Any]]:
    return {f"{prefix}.{f.name}": float for f in fields(DetectorProfile)}


# key -> parser
KEYS: dict[str, Callable[[str], Any]] = {
    "ccs.beta": float,
    "ccs.kappa_mode": KappaMode,
    "ccs.detection_score_threshold": float,
    "ccs.n0_score_threshold": float,
    "ccs.m": _optional_int,
    "metrics.alpha_iou": float,
    "metrics.lambda": float,
    "metrics.beta_dummy": float,
    "metrics.epsilon": float,
    "metrics.num_classes": _optional_int,
    "congruence.tau": float,
    "congruence.yellow_rule": YellowRule,
    "robustness.seeds": _seeds,
    "simulate.n_images": int,
    "simulate.m": int,
    "scene.width": float,
    "scene.height": float,
    "scene.min_objects": int,
    "scene.max_objects": int,
    "scene.min_size": float,
    "scene.max_size": float,
    "scene.num_classes": int,
    **_profile_keys("profile_a"),
    **_profile_keys("profile_b"),
}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {line!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def load_config(path: str | Path) -> dict[str, str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config_text(text, str(path))


def parse_values(raw: Mapping[str, str]) -> dict[str, Any]:
    out = {}
    for key, value in raw.items():
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
        try:
            out[key] = KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None
    return out


@dataclass(frozen=True)
class RunConfig:
    ccs: ConsensusConfig = ConsensusConfig()
    metrics: MetricConfig = MetricConfig()
    tau: float = DEFAULT_TAU
    yellow_rule: YellowRule = YellowRule.OR
    seeds: tuple[int, ...] = DEFAULT_SEEDS

    def __post_init__(self) -> None:
        if self.tau < 0:
            raise ConfigError(f"tau must be non-negative, got {self.tau}")


@dataclass(frozen=True)
class ExperimentConfig:
    n_images: int = 500
    m: int = 9
    scene: SceneSpec = SceneSpec()
    profile_a: DetectorProfile = PROFILE_A
    profile_b: DetectorProfile = PROFILE_B

    def __post_init__(self) -> None:
        if self.n_images < 1:
            raise ConfigError("simulate.n_images must be positive")
        if self.m < 2:
            raise ConfigError("simulate.m must be >= 2")


def _section(values: Mapping[str, Any], prefix: str, rename: Mapping[str, str] = {}) -> dict[str, Any]:
    out = {}
    for key, value in values.items():
        if key.startswith(prefix + "."):
            name = key[len(prefix) + 1:]
            out[rename.get(name, name)] = value
    return out


def build_run_config(values: Mapping[str, Any]) -> RunConfig:
    try:
        return RunConfig(
            ccs=ConsensusConfig(**_section(values, "ccs")),
            metrics=MetricConfig(**_section(values, "metrics", {"lambda": "lam"})),
            tau=values.get("congruence.tau", DEFAULT_TAU),
            yellow_rule=values.get("congruence.yellow_rule", YellowRule.OR),
            seeds=values.get("robustness.seeds", DEFAULT_SEEDS),
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def build_experiment_config(values: Mapping[str, Any]) -> ExperimentConfig:
    try:
        scene = SceneSpec(**_section(values, "scene"))
        a = DetectorProfile(**{**PROFILE_A.__dict__, **_section(values, "profile_a")})
        b = DetectorProfile(**{**PROFILE_B.__dict__, **_section(values, "profile_b")})
        return ExperimentConfig(
            n_images=values.get("simulate.n_images", 500),
            m=values.get("simulate.m", 9),
            scene=scene,
            profile_a=a,
            profile_b=b,
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None

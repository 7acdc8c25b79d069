"""Plain-text ``key = value`` run configuration."""
from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, Optional

from dbel.brstm import BrstmConfig
from dbel.errors import ConfigError

SEED_ENV = "DBEL_SEED"
PATH_KEYS = ("data_dir", "work_dir", "enhanced_dir")


@dataclass(frozen=True)
class RunConfig:
    data_dir: Optional[Path] = None
    work_dir: Path = Path("dbel-run")
    enhanced_dir: Optional[Path] = None
    seed: int = 0
    test_ratio: float = 0.30
    val_ratio: float = 0.20
    raw_size: int = 164
    donor_samples: int = 200
    donor_epochs: int = 5
    svm_lambda: float = 1e-4
    svm_epochs: int = 20
    mlp_hidden: int = 64
    mlp_epochs: int = 100
    mlp_lr: float = 0.01
    ada_rounds: int = 50
    brstm: BrstmConfig = field(default_factory=BrstmConfig)

    def __post_init__(self):
        for name in ("test_ratio", "val_ratio"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {value}")
        for name in ("raw_size", "mlp_hidden", "ada_rounds"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")
        for name in ("donor_samples", "donor_epochs", "svm_epochs", "mlp_epochs"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")
        if self.brstm.seed != self.seed:
            object.__setattr__(self, "brstm", self.brstm.replace(seed=self.seed))

    @property
    def enhanced(self) -> Path:
        return self.enhanced_dir or self.work_dir / "enhanced"

    def path(self, *parts: str) -> Path:
        return self.work_dir.joinpath(*parts)

    def to_dict(self) -> Dict:
        out = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "brstm"}
        out = {k: str(v) if isinstance(v, Path) else v for k, v in out.items()}
        out["brstm"] = self.brstm.to_dict()
        return out


def _convert(key: str, raw: str, template):
    try:
        if isinstance(template, bool):
            low = raw.lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError(raw)
            return low in ("true", "yes", "1")
        if isinstance(template, tuple):
            items = [s.strip() for s in raw.strip("()[] ").split(",") if s.strip()]
            kind = type(template[0]) if template else float
            return tuple(kind(s) for s in items)
        if isinstance(template, int):
            return int(raw)
        if isinstance(template, float):
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {type(template).__name__}") from None
    return raw


def parse_pairs(text: str, source: str = "<config>") -> Dict[str, str]:
    pairs: Dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in pairs:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def build_config(pairs: Dict[str, str], base_dir: Path = Path("."), env=None) -> RunConfig:
    """RunConfig from string pairs; relative paths resolve against ``base_dir``."""
    env = os.environ if env is None else env
    run_defaults = RunConfig.__dataclass_fields__
    brstm_defaults = BrstmConfig()
    run_kw, brstm_kw = {}, {}
    for key, raw in pairs.items():
        if key in PATH_KEYS:
            p = Path(raw).expanduser()
            run_kw[key] = p if p.is_absolute() else base_dir / p
        elif key in run_defaults and key != "brstm":
            run_kw[key] = _convert(key, raw, run_defaults[key].default)
        elif hasattr(brstm_defaults, key):
            brstm_kw[key] = _convert(key, raw, getattr(brstm_defaults, key))
        else:
            raise ConfigError(f"unknown config key {key!r}")
    if "seed" in brstm_kw:
        run_kw.setdefault("seed", brstm_kw.pop("seed"))
    if env.get(SEED_ENV, "").strip():
        try:
            run_kw["seed"] = int(env[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env[SEED_ENV]!r}") from None
    if "work_dir" not in run_kw:
        run_kw["work_dir"] = base_dir / RunConfig.work_dir
    seed = run_kw.get("seed", 0)
    brstm = BrstmConfig(**{**brstm_kw, "seed": seed})
    return RunConfig(brstm=brstm, **run_kw)


def load_config(path, env=None) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return build_config(parse_pairs(text, str(path)), path.parent, env)


def with_overrides(config: RunConfig, **changes) -> RunConfig:
    return replace(config, **{k: v for k, v in changes.items() if v is not None})

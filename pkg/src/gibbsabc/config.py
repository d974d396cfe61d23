"""Run configuration: defaults, config-file parsing, CLI overrides.

A config file is plain `key = value` lines with '#' comments; any CLI
flag overrides the file. Defaults: 1% tolerance quantile, 1000 Gibbs
sweeps, base-10 logs; proposal and dataset budgets default to desk
scale so a full validation study stays in the minutes range.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import InputError

EPSILON_MODES = ("exact-zero", "quantile", "fixed", "infinite")
OUT_DIR_ENV = "GIBBSABC_OUT"


@dataclass(frozen=True)
class RunConfig:
    seed: int = 1
    n_proposals: int = 200_000
    epsilon_mode: str = "quantile"
    quantile_q: float = 0.01
    epsilon_value: float = 0.0
    pilot_size: int = 10_000
    gibbs_sweeps: int = 1000
    log_base: float = 10.0
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    two_step: bool = False
    epsilon_from_run: bool = False
    datasets: int = 200
    sites: int = 50
    out_dir: Path | None = field(default=None)

    def validate(self) -> "RunConfig":
        if self.epsilon_mode not in EPSILON_MODES:
            raise InputError(f"unknown epsilon mode {self.epsilon_mode!r}")
        if not 0.0 < self.quantile_q <= 1.0:
            raise InputError(f"quantile must be in (0, 1], got {self.quantile_q}")
        if self.epsilon_mode == "quantile" and self.pilot_size < 100:
            raise InputError("pilot size must be at least 100 in quantile mode")
        if self.epsilon_mode == "fixed" and self.epsilon_value < 0:
            raise InputError("fixed epsilon must be non-negative")
        if self.n_proposals < 0:
            raise InputError("proposal budget must be non-negative")
        if self.gibbs_sweeps < 1:
            raise InputError("need at least one Gibbs sweep")
        if self.log_base != 10.0 and abs(self.log_base - 2.718281828459045) > 1e-12:
            raise InputError("log base must be 10 or e")
        if self.workers < 1:
            raise InputError("worker count must be positive")
        if self.datasets < 1 or self.sites < 1:
            raise InputError("datasets and sites must be positive")
        return self

    def describe(self) -> list[tuple[str, str]]:
        """Config echo for run summaries.

        The worker count is execution plumbing, not statistics, and is
        deliberately left out so outputs stay byte-identical across
        worker counts; output paths are omitted for the same reason.
        """
        pairs = [
            ("seed", str(self.seed)),
            ("proposals", str(self.n_proposals)),
            ("epsilon_mode", self.epsilon_mode),
        ]
        if self.epsilon_mode == "quantile":
            pairs.append(("quantile", repr(self.quantile_q)))
            pairs.append(("pilot_size", str(self.pilot_size)))
            pairs.append(("epsilon_from_run", str(self.epsilon_from_run).lower()))
        if self.epsilon_mode == "fixed":
            pairs.append(("epsilon", repr(self.epsilon_value)))
        pairs += [
            ("gibbs_sweeps", str(self.gibbs_sweeps)),
            ("log_base", "e" if self.log_base != 10.0 else "10"),
            ("two_step", str(self.two_step).lower()),
            ("datasets", str(self.datasets)),
            ("sites", str(self.sites)),
        ]
        return pairs


def parse_epsilon_spec(text: str) -> dict:
    """Decode the --epsilon flag: 0 | inf | q:<frac> | v:<value>."""
    t = text.strip().lower()
    if t == "0":
        return {"epsilon_mode": "exact-zero"}
    if t in ("inf", "infinite"):
        return {"epsilon_mode": "infinite"}
    if t.startswith("q:"):
        try:
            q = float(t[2:])
        except ValueError:
            raise InputError(f"bad quantile in epsilon spec {text!r}")
        return {"epsilon_mode": "quantile", "quantile_q": q}
    if t.startswith("v:"):
        try:
            v = float(t[2:])
        except ValueError:
            raise InputError(f"bad value in epsilon spec {text!r}")
        return {"epsilon_mode": "fixed", "epsilon_value": v}
    raise InputError(
        f"cannot parse epsilon spec {text!r}; expected 0, inf, q:<frac> or v:<value>"
    )


_FILE_KEYS = {
    "seed": int,
    "proposals": int,
    "pilot": int,
    "sweeps": int,
    "workers": int,
    "datasets": int,
    "sites": int,
    "epsilon": str,
    "log_base": str,
    "two_step": str,
    "epsilon_from_run": str,
    "out": str,
}

_KEY_TO_FIELD = {
    "proposals": "n_proposals",
    "pilot": "pilot_size",
    "sweeps": "gibbs_sweeps",
}


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise InputError(f"cannot parse boolean {text!r}")


def load_config_file(path: str | Path) -> dict:
    """Parse `key = value` lines into RunConfig field overrides."""
    overrides: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _FILE_KEYS:
            raise InputError(f"{path}:{lineno}: unknown config key {key!r}")
        if key == "epsilon":
            overrides.update(parse_epsilon_spec(value))
        elif key == "log_base":
            overrides["log_base"] = parse_log_base(value)
        elif key in ("two_step", "epsilon_from_run"):
            overrides[key] = _parse_bool(value)
        elif key == "out":
            overrides["out_dir"] = Path(value)
        else:
            overrides[_KEY_TO_FIELD.get(key, key)] = _FILE_KEYS[key](value)
    return overrides


def parse_log_base(text: str) -> float:
    t = text.strip().lower()
    if t == "10":
        return 10.0
    if t == "e":
        return 2.718281828459045
    raise InputError(f"log base must be '10' or 'e', got {text!r}")


def resolve_config(file_overrides: dict, flag_overrides: dict) -> RunConfig:
    """Defaults <- config file <- CLI flags, then validate."""
    cfg = RunConfig()
    if file_overrides:
        cfg = replace(cfg, **file_overrides)
    if flag_overrides:
        cfg = replace(cfg, **flag_overrides)
    if cfg.out_dir is None and os.environ.get(OUT_DIR_ENV):
        cfg = replace(cfg, out_dir=Path(os.environ[OUT_DIR_ENV]))
    return cfg.validate()

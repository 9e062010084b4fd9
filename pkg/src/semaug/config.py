"""Flat ``key=value`` pipeline configuration."""
from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .dataset import CombinationSpec
from .features import FbankConfig
from .syntax import DEFAULT_RULES, Rule, parse_rules


class ConfigError(ValueError):
    pass


PATH_KEYS = ("lexicon", "tagset", "transcripts", "tagged", "ctm", "wav_scp", "feats",
             "align", "raw_manifest", "aug_manifest", "variants", "out_dir")


@dataclass
class PipelineConfig:
    lexicon: str | None = None
    tagset: str | None = None
    transcripts: str | None = None
    tagged: str | None = None
    ctm: str | None = None
    wav_scp: str | None = None
    feats: str | None = None
    align: str | None = None
    raw_manifest: str | None = None
    aug_manifest: str | None = None
    variants: str | None = None
    out_dir: str = "."
    rules: tuple[Rule, ...] = DEFAULT_RULES
    r7_final: bool = False
    ratios: str = "Raw=1"
    target_size: int | None = None
    seed: int = 0
    workers: int = 1
    sample_rate: int = 16000
    frame_len_ms: float = 25.0
    frame_shift_ms: float = 10.0
    num_mel_bins: int = 40
    fft_size: int = 512
    preemphasis: float = 0.97
    low_freq: float = 20.0
    high_freq: float | None = None
    dither: float = 0.0
    log_floor: float = 1e-10

    def fbank(self) -> FbankConfig:
        return FbankConfig(self.sample_rate, self.frame_len_ms, self.frame_shift_ms,
                           self.num_mel_bins, self.fft_size, self.preemphasis, self.low_freq,
                           self.high_freq, self.dither, self.log_floor)

    def combination(self, default_size: int) -> CombinationSpec:
        return CombinationSpec.parse(self.ratios, self.seed, self.target_size or default_size)

    def out(self, name: str) -> Path:
        return Path(self.out_dir) / name

    def path(self, key: str, default_name: str | None = None) -> Path:
        """Configured input path, falling back to ``out_dir/default_name``."""
        value = getattr(self, key)
        if value is None:
            if default_name is None:
                raise ConfigError(f"missing required setting {key!r}")
            return self.out(default_name)
        return Path(value)

    def validate(self, required: Iterable[str] = (), defaults: Mapping[str, str] | None = None) -> None:
        defaults = defaults or {}
        for key in required:
            p = self.path(key, defaults.get(key))
            if not p.exists():
                raise ConfigError(f"{key}: input {p} does not exist")
        out = Path(self.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        if not os.access(out, os.W_OK):
            raise ConfigError(f"output directory {out} is not writable")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        try:
            self.fbank()
        except ValueError as exc:
            raise ConfigError(f"feature settings: {exc}") from None


_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}


def _convert(key: str, value: str):
    kind = _FIELDS[key].type
    if key == "rules":
        return parse_rules(value)
    if value.strip().lower() in ("", "none") and "None" in kind:
        return None
    if kind.startswith("bool"):
        low = value.strip().lower()
        if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
            raise ConfigError(f"{key}: not a boolean: {value!r}")
        return low in ("1", "true", "yes", "on")
    try:
        if kind.startswith("int"):
            return int(value)
        if kind.startswith("float"):
            return float(value)
    except ValueError:
        raise ConfigError(f"{key}: bad number {value!r}") from None
    return value.strip()


def normalize_key(key: str) -> str:
    return key.strip().replace("-", "_")


def parse_config(lines: Iterable[str]) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = normalize_key(key)
        if not sep or not key:
            raise ConfigError(f"config line {lineno}: expected key=value, got {line!r}")
        if key not in _FIELDS:
            raise ConfigError(f"config line {lineno}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def build_config(config_file: str | None = None, overrides: Mapping[str, object] | None = None
                 ) -> PipelineConfig:
    """Defaults, then the config file, then explicit overrides (CLI flags)."""
    values: dict[str, object] = {}
    if config_file:
        with open(config_file, encoding="utf-8") as f:
            values.update(parse_config(f))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[normalize_key(key)] = value
    kwargs = {}
    for key, value in values.items():
        if key not in _FIELDS:
            raise ConfigError(f"unknown setting {key!r}")
        kwargs[key] = _convert(key, value) if isinstance(value, str) else value
    try:
        cfg = PipelineConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def format_config(values: Mapping[str, object]) -> str:
    return "".join(f"{k}={v}\n" for k, v in values.items())

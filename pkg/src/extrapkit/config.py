"""Tunable defaults, overridable from a ``section.key=value`` file."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field


@dataclass
class FrameConfig:
    # Cityscapes preprocessing; ADE20K-bedroom uses 384x512.
    height: int = 256
    width: int = 512
    crop_ratio: float = 0.5


@dataclass
class PanopticConfig:
    sigma: float = 8.0
    threshold: float = 0.1
    nms_radius: int = 5
    max_centers: int = 200


@dataclass
class LossConfig:
    w_center: float = 200.0
    w_offset: float = 0.01
    gamma: float = 5.0
    lambda_fl: float = 5.0
    lambda_ce: float = 5.0
    lambda_fm_stage2: float = 1.0
    lambda_fm_stage4: float = 10.0
    lambda_vgg: float = 10.0
    lambda_kld: float = 0.05
    grad_epsilon: float = 1e-5
    boundary_loss: str = "bce"


@dataclass
class PatchConfig:
    size: int = 64
    count: int = 4
    references: int = 4


@dataclass
class MetricsConfig:
    min_pixels: int = 1
    crop_k: float = 0.5
    bins: int = 10
    max_percent: float = 400.0


@dataclass
class ZoomConfig:
    steps: int = 6
    frames_per_transition: int = 64
    intro_frames: int = 30


@dataclass
class Config:
    frame: FrameConfig = field(default_factory=FrameConfig)
    panoptic: PanopticConfig = field(default_factory=PanopticConfig)
    loss: LossConfig = field(default_factory=LossConfig)
    patch: PatchConfig = field(default_factory=PatchConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    zoom: ZoomConfig = field(default_factory=ZoomConfig)

    def set(self, key: str, raw: str) -> None:
        section_name, _, name = key.partition(".")
        section = getattr(self, section_name, None)
        if section is None or not dataclasses.is_dataclass(section) or not name:
            raise KeyError(f"unknown config key {key!r}")
        types = {f.name: f.type for f in dataclasses.fields(section)}
        if name not in types:
            raise KeyError(f"unknown config key {key!r}")
        current = getattr(section, name)
        try:
            value = type(current)(raw)
        except ValueError:
            raise ValueError(f"config key {key!r}: cannot parse {raw!r} as {type(current).__name__}")
        setattr(section, name, value)

    def as_lines(self) -> list[str]:
        out = []
        for f in dataclasses.fields(self):
            for k, v in dataclasses.asdict(getattr(self, f.name)).items():
                out.append(f"{f.name}.{k}={v}")
        return out


def load_config(path=None) -> Config:
    cfg = Config()
    if path is None:
        return cfg
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {line!r}")
            cfg.set(key.strip(), value.strip())
    return cfg

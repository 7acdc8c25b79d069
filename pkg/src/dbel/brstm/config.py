"""Network and training hyper-parameters."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from typing import Tuple

from dbel.errors import ConfigError

BRANCHES = ("B", "C", "D", "E")
AUXILIARY_BRANCHES = ("B", "C")


@dataclass(frozen=True)
class BrstmConfig:
    input_height: int = 82
    input_width: int = 82
    input_channels: int = 1
    stem_width: int = 8
    branch_widths: Tuple[int, int, int] = (8, 16, 16)
    squeezed_widths: Tuple[int, int, int] = (32, 64, 128)
    boosted_widths: Tuple[int, int, int] = (128, 256, 512)
    kernel_size: int = 3
    dilations: Tuple[int, int, int, int] = (1, 1, 2, 2)
    reduction_width: int = 128
    dense_widths: Tuple[int, int, int] = (512, 256, 2)
    dropout_rates: Tuple[float, float] = (0.5, 0.5)
    seed: int = 0
    epochs: int = 10
    learning_rate: float = 1e-3
    momentum: float = 0.9
    batch_size: int = 32
    augment: bool = True

    def __post_init__(self):
        for name in ("branch_widths", "squeezed_widths", "boosted_widths", "dilations",
                     "dense_widths", "dropout_rates"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        self.validate()

    def validate(self) -> None:
        if len(self.squeezed_widths) != 3 or len(self.boosted_widths) != 3 or len(self.branch_widths) != 3:
            raise ConfigError("exactly three STM blocks are required")
        for sq, bo in zip(self.squeezed_widths, self.boosted_widths):
            if bo != len(BRANCHES) * sq:
                raise ConfigError(f"boosted width {bo} must equal 4 x squeezed width {sq}")
        if len(self.dilations) != len(BRANCHES) or min(self.dilations) < 1:
            raise ConfigError("one positive dilation per branch (B, C, D, E) is required")
        if len(self.dense_widths) != 3 or self.dense_widths[-1] != 2:
            raise ConfigError("dense head must be three layers ending in 2 classes")
        if len(self.dropout_rates) != 2 or not all(0.0 <= r < 1.0 for r in self.dropout_rates):
            raise ConfigError("two dropout rates in [0, 1) are required")
        positive = [self.input_height, self.input_width, self.input_channels, self.stem_width,
                    self.kernel_size, self.reduction_width, self.batch_size,
                    *self.branch_widths, *self.squeezed_widths, *self.dense_widths]
        if min(positive) < 1:
            raise ConfigError("all extents and widths must be positive")
        if self.kernel_size % 2 == 0:
            raise ConfigError("branch kernel size must be odd")
        if self.epochs < 0:
            raise ConfigError("epochs must be non-negative")
        if self.learning_rate < 0 or not 0.0 <= self.momentum < 1.0:
            raise ConfigError("learning_rate >= 0 and 0 <= momentum < 1 required")
        if min(self.input_height, self.input_width) < 8:
            raise ConfigError("input extents must be at least 8 (three 2x poolings)")

    @property
    def num_classes(self) -> int:
        return self.dense_widths[-1]

    @property
    def feature_width(self) -> int:
        return self.dense_widths[1]

    def replace(self, **changes) -> "BrstmConfig":
        values = asdict(self)
        unknown = set(changes) - set(values)
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        values.update(changes)
        return BrstmConfig(**values)

    def to_dict(self) -> dict:
        out = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in out.items()}

    @classmethod
    def from_dict(cls, values: dict) -> "BrstmConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**values)


def tiny_config(**overrides) -> BrstmConfig:
    """8x8 input, squeezed widths [2, 2, 2]: small enough for finite differences."""
    base = dict(
        input_height=8, input_width=8, stem_width=2, branch_widths=(2, 2, 2),
        squeezed_widths=(2, 2, 2), boosted_widths=(8, 8, 8), reduction_width=3,
        dense_widths=(4, 3, 2),
    )
    base.update(overrides)
    return BrstmConfig(**base)

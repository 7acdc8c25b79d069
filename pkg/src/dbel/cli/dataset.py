"""Dataset ingestion from a two-folder layout and stratified splitting."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from PIL import Image

from dbel.errors import ConfigError, DataError, LayoutError
from dbel.preprocess.imageio import IMAGE_SUFFIXES

log = logging.getLogger(__name__)

CLASS_DIRS = {"parasitized": 1, "uninfected": 0}
SPLITS = ("train", "val", "test")


@dataclass(frozen=True)
class Record:
    path: str  # relative to the dataset root, "/" separated
    label: int
    split: Optional[str] = None


@dataclass(frozen=True)
class DatasetIndex:
    root: Path
    records: Tuple[Record, ...]
    seed: Optional[int] = None
    excluded: Tuple[Tuple[str, str], ...] = field(default=())

    @property
    def class_counts(self) -> Dict[int, int]:
        labels = [r.label for r in self.records]
        return {0: labels.count(0), 1: labels.count(1)}

    def subset(self, split: str) -> List[Record]:
        return [r for r in self.records if r.split == split]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["path", "label", "split"])
        for r in self.records:
            w.writerow([r.path, r.label, r.split or ""])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, root: Path, seed: Optional[int] = None) -> "DatasetIndex":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["path", "label", "split"]:
            raise DataError("split file must start with the header path,label,split")
        records = []
        for row in rows[1:]:
            if len(row) != 3 or row[1] not in ("0", "1") or row[2] not in SPLITS + ("",):
                raise DataError(f"malformed split row {row!r}")
            records.append(Record(row[0], int(row[1]), row[2] or None))
        return cls(Path(root), tuple(records), seed)


def _class_dirs(root: Path) -> Dict[int, Path]:
    if not root.is_dir():
        raise LayoutError(f"dataset root {root} is not a directory")
    found: Dict[int, Path] = {}
    for child in sorted(root.iterdir()):
        label = CLASS_DIRS.get(child.name.lower())
        if label is not None and child.is_dir():
            if label in found:
                raise LayoutError(f"{root}: more than one folder for class {child.name.lower()!r}")
            found[label] = child
    for name, label in CLASS_DIRS.items():
        if label not in found:
            raise LayoutError(f"{root}: missing class folder {name!r}")
    return found


def ingest_dataset(root, verify: bool = True) -> DatasetIndex:
    """Index ``root/{parasitized,uninfected}/*`` in lexicographic path order.

    Class folder names are matched case-insensitively. Files whose header
    cannot be decoded are excluded with a warning and listed in ``excluded``.
    """
    root = Path(root)
    records, excluded = [], []
    for label, folder in sorted(_class_dirs(root).items(), key=lambda kv: kv[1].name):
        count = 0
        for f in sorted(folder.iterdir()):
            if not f.is_file() or f.suffix.lower() not in IMAGE_SUFFIXES:
                continue
            rel = f.relative_to(root).as_posix()
            if verify:
                try:
                    with Image.open(f) as im:
                        im.verify()
                except Exception as exc:  # Pillow raises many types on corrupt input
                    log.warning("skipping unreadable image %s: %s", f, exc)
                    excluded.append((rel, str(exc)))
                    continue
            records.append(Record(rel, label))
            count += 1
        if count == 0:
            raise LayoutError(f"class folder {folder} contains no readable images")
    records.sort(key=lambda r: r.path)
    if excluded:
        log.warning("%d unreadable images excluded", len(excluded))
    return DatasetIndex(root, tuple(records), None, tuple(excluded))


def round_half_up(value: Fraction) -> int:
    return int((value + Fraction(1, 2)) // 1)


def _ratio(value: float, name: str) -> Fraction:
    if not 0.0 < float(value) < 1.0:
        raise ConfigError(f"{name} must lie strictly between 0 and 1, got {value}")
    return Fraction(repr(float(value)))


def split_sizes(n: int, test_ratio: float = 0.30, val_ratio: float = 0.20) -> Tuple[int, int, int]:
    """(train, val, test) counts for one class; each stage rounds half up."""
    test = round_half_up(n * _ratio(test_ratio, "test_ratio"))
    val = round_half_up((n - test) * _ratio(val_ratio, "val_ratio"))
    return n - test - val, val, test


def split_dataset(index: DatasetIndex, test_ratio: float = 0.30, val_ratio: float = 0.20,
                  seed: int = 0) -> DatasetIndex:
    """Stratified shuffle split: test first, then train/val from the remainder."""
    counts = index.class_counts
    if min(counts.values()) == 0:
        raise DataError(f"both classes must be present, got counts {counts}")
    tags: Dict[int, str] = {}
    for label in (0, 1):
        members = [i for i, r in enumerate(index.records) if r.label == label]
        n_train, n_val, _ = split_sizes(len(members), test_ratio, val_ratio)
        order = np.random.default_rng([seed, label]).permutation(len(members))
        for rank, k in enumerate(order):
            tags[members[k]] = "train" if rank < n_train else "val" if rank < n_train + n_val else "test"
    records = tuple(replace(r, split=tags[i]) for i, r in enumerate(index.records))
    return DatasetIndex(index.root, records, seed, index.excluded)

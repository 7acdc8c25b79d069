"""Model persistence: a JSON manifest plus one flat little-endian tensor blob.

Layout of a saved model directory::

    manifest.json   format version, model kind, config, tensor directory
    tensors.bin     concatenated raw tensors, in manifest order

Every manifest entry is validated against the blob and against the shapes
implied by the config before any model object is built.
"""
from __future__ import annotations

import hashlib
import json
from collections import OrderedDict
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from dbel.brstm import BrstmConfig, BrstmModel, build_model
from dbel.ensemble import AdaBoostModel, EnsembleModel, LinearSvm, MlpClassifier, Standardizer, Stump
from dbel.errors import ConfigError, LoadError
from dbel.nn import Parameter

FORMAT_VERSION = 1
MANIFEST = "manifest.json"
BLOB = "tensors.bin"
DTYPES = {"<f4": np.dtype("<f4"), "<f8": np.dtype("<f8"), "<i8": np.dtype("<i8")}

Tensors = "OrderedDict[str, Tuple[np.ndarray, bool]]"


def _dtype_code(arr: np.ndarray) -> str:
    for code, dt in DTYPES.items():
        if arr.dtype == dt.newbyteorder("=") or arr.dtype == dt:
            return code
    raise TypeError(f"cannot persist dtype {arr.dtype}")


def dumps_json(obj) -> str:
    """Canonical JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _write(path: Path, kind: str, config: Dict, tensors: Tensors, extra: Optional[Dict] = None) -> None:
    path.mkdir(parents=True, exist_ok=True)
    entries, chunks, offset = [], [], 0
    for name, (arr, frozen) in tensors.items():
        code = _dtype_code(np.asarray(arr))
        raw = np.ascontiguousarray(arr, dtype=DTYPES[code]).tobytes()
        entries.append({"name": name, "shape": list(np.shape(arr)), "dtype": code,
                        "offset": offset, "length": len(raw), "frozen": bool(frozen)})
        chunks.append(raw)
        offset += len(raw)
    manifest = {"format_version": FORMAT_VERSION, "kind": kind, "config": config, "tensors": entries}
    manifest.update(extra or {})
    (path / BLOB).write_bytes(b"".join(chunks))
    (path / MANIFEST).write_text(dumps_json(manifest))


def _read(path: Path, kind: str, expected: Dict[str, Tuple[Tuple[int, ...], str]]):
    """Validated {name: (array, frozen)} plus the manifest; raises LoadError naming the bad entry."""
    try:
        manifest = json.loads((path / MANIFEST).read_text())
    except (OSError, ValueError) as exc:
        raise LoadError(f"{path / MANIFEST}: unreadable manifest ({exc})") from exc
    if manifest.get("format_version") != FORMAT_VERSION:
        raise LoadError(f"{path}: format version {manifest.get('format_version')!r}, expected {FORMAT_VERSION}")
    if manifest.get("kind") != kind:
        raise LoadError(f"{path}: model kind {manifest.get('kind')!r}, expected {kind!r}")
    try:
        blob = (path / BLOB).read_bytes()
    except OSError as exc:
        raise LoadError(f"{path / BLOB}: unreadable blob ({exc})") from exc
    entries = manifest.get("tensors")
    if not isinstance(entries, list):
        raise LoadError(f"{path}: manifest has no tensor directory")
    seen = {}
    for entry in entries:
        name = entry.get("name") if isinstance(entry, dict) else None
        if not isinstance(name, str):
            raise LoadError(f"{path}: malformed tensor entry {entry!r}")
        if name in seen:
            raise LoadError(f"tensor {name!r}: listed twice")
        if name not in expected:
            raise LoadError(f"tensor {name!r}: not part of a {kind} model")
        shape, code = entry.get("shape"), entry.get("dtype")
        offset, length = entry.get("offset"), entry.get("length")
        if code not in DTYPES:
            raise LoadError(f"tensor {name!r}: unsupported dtype {code!r}")
        if not isinstance(shape, list) or not all(isinstance(s, int) and s >= 0 for s in shape):
            raise LoadError(f"tensor {name!r}: malformed shape {shape!r}")
        want_shape, want_code = expected[name]
        if tuple(shape) != tuple(want_shape):
            raise LoadError(f"tensor {name!r}: shape {tuple(shape)} does not match config {tuple(want_shape)}")
        if want_code is not None and code != want_code:
            raise LoadError(f"tensor {name!r}: dtype {code} where {want_code} is required")
        if not isinstance(offset, int) or not isinstance(length, int) or offset < 0:
            raise LoadError(f"tensor {name!r}: malformed offset/length")
        if length != int(np.prod(shape, dtype=np.int64)) * DTYPES[code].itemsize:
            raise LoadError(f"tensor {name!r}: length {length} inconsistent with shape {tuple(shape)}")
        if offset + length > len(blob):
            raise LoadError(f"tensor {name!r}: blob truncated ({len(blob)} bytes, entry needs {offset + length})")
        seen[name] = entry
    missing = [n for n in expected if n not in seen]
    if missing:
        raise LoadError(f"tensor {missing[0]!r}: missing from manifest")
    used = max((e["offset"] + e["length"] for e in seen.values()), default=0)
    if used != len(blob):
        raise LoadError(f"{path / BLOB}: {len(blob) - used} unexpected trailing bytes")
    out = OrderedDict()
    for name, e in seen.items():
        arr = np.frombuffer(blob, dtype=DTYPES[e["dtype"]], count=int(np.prod(e["shape"], dtype=np.int64)),
                            offset=e["offset"]).reshape(e["shape"])
        out[name] = (arr.astype(arr.dtype.newbyteorder("=")), bool(e.get("frozen", False)))
    return out, manifest


# ---------------------------------------------------------------- network

def save_brstm(model: BrstmModel, path, train_log: Optional[Dict] = None) -> None:
    tensors = OrderedDict((n, (p.data, p.frozen)) for n, p in model.params.items())
    tensors["input.mean"] = (model.input_mean, False)
    tensors["input.std"] = (model.input_std, False)
    extra = {}
    if train_log is not None:
        extra["train_log_sha256"] = hashlib.sha256(dumps_json(train_log).encode()).hexdigest()
    _write(Path(path), "brstm", model.config.to_dict(), tensors, extra)


def load_brstm(path) -> BrstmModel:
    path = Path(path)
    manifest = _peek(path)
    try:
        config = BrstmConfig.from_dict(manifest.get("config") or {})
    except (ConfigError, TypeError) as exc:
        raise LoadError(f"{path}: invalid config snapshot ({exc})") from exc
    model = build_model(config, seed=0)
    code = _dtype_code(model["A.conv.w"].data)
    expected = {n: (p.shape, code) for n, p in model.params.items()}
    expected["input.mean"] = ((config.input_channels,), code)
    expected["input.std"] = ((config.input_channels,), code)
    tensors, _ = _read(path, "brstm", expected)
    for name, param in model.params.items():
        arr, frozen = tensors[name]
        param.data[...] = arr
        param.frozen = frozen
    model.input_mean = tensors["input.mean"][0].copy()
    model.input_std = tensors["input.std"][0].copy()
    return model


# --------------------------------------------------------------- ensemble

def save_ensemble(model: EnsembleModel, path) -> None:
    svm, mlp, ada = model.svm, model.mlp, model.adaboost
    f8 = lambda a: np.asarray(a, dtype=np.float64)  # noqa: E731
    tensors = OrderedDict([
        ("svm.weights", (f8(svm.weights), False)),
        ("svm.bias", (f8(svm.bias), False)),
        ("svm.scaler.mean", (f8(svm.scaler.mean), False)),
        ("svm.scaler.scale", (f8(svm.scaler.scale), False)),
        ("mlp.hidden.w", (f8(mlp.hidden_w.data), False)),
        ("mlp.hidden.b", (f8(mlp.hidden_b.data), False)),
        ("mlp.out.w", (f8(mlp.out_w.data), False)),
        ("mlp.out.b", (f8(mlp.out_b.data), False)),
        ("mlp.scaler.mean", (f8(mlp.scaler.mean), False)),
        ("mlp.scaler.scale", (f8(mlp.scaler.scale), False)),
        ("adaboost.feature", (np.array([s.feature for s in ada.stumps], dtype=np.int64), False)),
        ("adaboost.threshold", (f8([s.threshold for s in ada.stumps]), False)),
        ("adaboost.polarity", (np.array([s.polarity for s in ada.stumps], dtype=np.int64), False)),
        ("adaboost.alpha", (f8(ada.alphas), False)),
        ("adaboost.error", (f8(ada.errors), False)),
        ("adaboost.weight_sum", (f8(ada.weight_sums), False)),
    ])
    config = {"n_features": model.n_features, "svm_lambda": svm.lam,
              "mlp_hidden": mlp.hidden, "adaboost_rounds": ada.rounds}
    _write(Path(path), "ensemble", config, tensors)


def _ensemble_shapes(config: Dict) -> Dict[str, Tuple[Tuple[int, ...], str]]:
    d, h, t = config["n_features"], config["mlp_hidden"], config["adaboost_rounds"]
    f8, i8 = "<f8", "<i8"
    return {
        "svm.weights": ((d,), f8), "svm.bias": ((), f8),
        "svm.scaler.mean": ((d,), f8), "svm.scaler.scale": ((d,), f8),
        "mlp.hidden.w": ((d, h), f8), "mlp.hidden.b": ((h,), f8),
        "mlp.out.w": ((h, 2), f8), "mlp.out.b": ((2,), f8),
        "mlp.scaler.mean": ((d,), f8), "mlp.scaler.scale": ((d,), f8),
        "adaboost.feature": ((t,), i8), "adaboost.threshold": ((t,), f8),
        "adaboost.polarity": ((t,), i8), "adaboost.alpha": ((t,), f8),
        "adaboost.error": ((t,), f8), "adaboost.weight_sum": ((t,), f8),
    }


def load_ensemble(path) -> EnsembleModel:
    path = Path(path)
    config = _peek(path).get("config") or {}
    keys = ("n_features", "svm_lambda", "mlp_hidden", "adaboost_rounds")
    if not all(isinstance(config.get(k), (int, float)) for k in keys) or config["adaboost_rounds"] < 1:
        raise LoadError(f"{path}: invalid ensemble config snapshot")
    t, _ = _read(path, "ensemble", _ensemble_shapes(config))
    a = {name: arr for name, (arr, _) in t.items()}
    d = config["n_features"]
    if np.any((a["adaboost.feature"] < 0) | (a["adaboost.feature"] >= d)):
        raise LoadError("tensor 'adaboost.feature': feature index out of range")
    svm = LinearSvm(a["svm.weights"], float(a["svm.bias"]), float(config["svm_lambda"]),
                    Standardizer(a["svm.scaler.mean"], a["svm.scaler.scale"]))
    mlp = MlpClassifier(Parameter(a["mlp.hidden.w"], "mlp.hidden.w", dtype=np.float64),
                        Parameter(a["mlp.hidden.b"], "mlp.hidden.b", dtype=np.float64),
                        Parameter(a["mlp.out.w"], "mlp.out.w", dtype=np.float64),
                        Parameter(a["mlp.out.b"], "mlp.out.b", dtype=np.float64),
                        Standardizer(a["mlp.scaler.mean"], a["mlp.scaler.scale"]))
    stumps = [Stump(int(f), float(th), int(p)) for f, th, p in
              zip(a["adaboost.feature"], a["adaboost.threshold"], a["adaboost.polarity"])]
    ada = AdaBoostModel(stumps, a["adaboost.alpha"].tolist(), d,
                        a["adaboost.error"].tolist(), a["adaboost.weight_sum"].tolist())
    return EnsembleModel(svm, mlp, ada)


# ------------------------------------------------------------------ generic

def _peek(path: Path) -> Dict:
    try:
        manifest = json.loads((path / MANIFEST).read_text())
    except (OSError, ValueError) as exc:
        raise LoadError(f"{path / MANIFEST}: unreadable manifest ({exc})") from exc
    if not isinstance(manifest, dict):
        raise LoadError(f"{path / MANIFEST}: manifest is not an object")
    if manifest.get("format_version") != FORMAT_VERSION:
        raise LoadError(f"{path}: format version {manifest.get('format_version')!r}, expected {FORMAT_VERSION}")
    return manifest


def save_model(model: Union[BrstmModel, EnsembleModel], path, train_log: Optional[Dict] = None) -> None:
    if isinstance(model, BrstmModel):
        save_brstm(model, path, train_log)
    elif isinstance(model, EnsembleModel):
        save_ensemble(model, path)
    else:
        raise TypeError(f"cannot save {type(model).__name__}")


def load_model(path) -> Union[BrstmModel, EnsembleModel]:
    kind = _peek(Path(path)).get("kind")
    if kind == "brstm":
        return load_brstm(path)
    if kind == "ensemble":
        return load_ensemble(path)
    raise LoadError(f"{path}: unknown model kind {kind!r}")

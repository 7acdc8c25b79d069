"""Pipeline steps behind each subcommand: enhance, train, features, train-ensemble,
evaluate, pca and predict. Each returns a process exit status."""
from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
from PIL import Image

from dbel.brstm import build_model, extract_features, pretrain_donor, train, transplant_auxiliary
from dbel.brstm.model import BrstmModel
from dbel.cli.config import RunConfig
from dbel.cli.dataset import DatasetIndex, ingest_dataset, split_dataset
from dbel.cli.export import csv_text, fmt, read_features, write_csv, write_features, write_json
from dbel.cli.persist import load_brstm, load_ensemble, save_brstm, save_ensemble
from dbel.ensemble import ensemble_predict, train_ensemble
from dbel.errors import ConfigError, DataError
from dbel.metrics import confusion, pca_top3, pr_curve, report, roc_curve
from dbel.nn import softmax
from dbel.preprocess import enhance, read_image, to_grayscale, write_pgm
from dbel.preprocess.imageio import IMAGE_SUFFIXES
from dbel.synthetic import grating_images

log = logging.getLogger(__name__)

SPLIT_FILE = "split.csv"
MODEL_DIR = "model"
ENSEMBLE_DIR = "ensemble"
REPORT_DIR = "reports"


def enhance_file(path, raw_size: int) -> np.ndarray:
    """Read an image, bilinearly resize to raw_size x raw_size if needed, enhance."""
    img = read_image(path)
    if img.shape[:2] != (raw_size, raw_size):
        img = np.asarray(Image.fromarray(img).resize((raw_size, raw_size), Image.BILINEAR))
    return enhance(img)


def load_enhanced(path) -> np.ndarray:
    img = read_image(path)
    return (to_grayscale(img) if img.ndim == 3 else img / 255.0).astype(np.float32)


def _images(index: DatasetIndex, records, model_shape) -> np.ndarray:
    out = np.empty((len(records),) + model_shape, dtype=np.float32)
    for k, r in enumerate(records):
        img = load_enhanced(index.root / r.path)
        if img.shape != model_shape:
            raise DataError(f"{r.path}: enhanced image is {img.shape}, model expects {model_shape}")
        out[k] = img
    return out


def _input_shape(model_or_cfg) -> tuple:
    cfg = model_or_cfg.config if isinstance(model_or_cfg, BrstmModel) else model_or_cfg
    return (cfg.input_height, cfg.input_width)


def _load_split(cfg: RunConfig) -> DatasetIndex:
    path = cfg.path(SPLIT_FILE)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path} (run 'train' first): {exc}") from exc
    return DatasetIndex.from_csv(text, cfg.enhanced, cfg.seed)


# ---------------------------------------------------------------- commands

def cmd_enhance(cfg: RunConfig, source: Optional[Path] = None, dest: Optional[Path] = None) -> int:
    source = source or cfg.data_dir
    if source is None:
        raise ConfigError("no input directory: pass one or set data_dir in the config")
    dest = dest or cfg.enhanced
    index = ingest_dataset(source)
    expected = _input_shape(cfg.brstm)
    for r in index.records:
        img = enhance_file(index.root / r.path, cfg.raw_size)
        if img.shape != expected:
            log.warning("%s: enhanced size %s differs from model input %s", r.path, img.shape, expected)
        out = (dest / r.path).with_suffix(".pgm")
        out.parent.mkdir(parents=True, exist_ok=True)
        write_pgm(out, img)
    print(f"enhanced {len(index.records)} images into {dest}"
          + (f" ({len(index.excluded)} unreadable skipped)" if index.excluded else ""))
    return 0


def cmd_train(cfg: RunConfig) -> int:
    index = split_dataset(ingest_dataset(cfg.enhanced), cfg.test_ratio, cfg.val_ratio, cfg.seed)
    cfg.work_dir.mkdir(parents=True, exist_ok=True)
    cfg.path(SPLIT_FILE).write_text(index.to_csv(), newline="")
    shape = _input_shape(cfg.brstm)
    train_recs, val_recs = index.subset("train"), index.subset("val")
    if not train_recs or not val_recs:
        raise DataError("train and validation splits must both be non-empty")
    x_train = _images(index, train_recs, shape)
    x_val = _images(index, val_recs, shape)
    y_train = np.array([r.label for r in train_recs])
    y_val = np.array([r.label for r in val_recs])

    model = build_model(cfg.brstm, seed=cfg.seed)
    logs: Dict = {}
    if cfg.donor_samples > 0 and cfg.donor_epochs > 0:
        aux_x, aux_y = grating_images(cfg.donor_samples, *shape, seed=cfg.seed)
        donor = pretrain_donor(aux_x, aux_y, cfg.brstm, seed=cfg.seed, epochs=cfg.donor_epochs)
        transplant_auxiliary(model, donor)
        logs["donor"] = donor.log.to_dict()
    tlog = train(model, (x_train, y_train), (x_val, y_val), cfg.brstm)
    logs["network"] = tlog.to_dict()
    logs["config"] = cfg.brstm.to_dict()
    logs["split_counts"] = {s: len(index.subset(s)) for s in ("train", "val", "test")}
    save_brstm(model, cfg.path(MODEL_DIR), train_log=logs)
    write_json(cfg.path("train_log.json"), logs)
    best = tlog.history[tlog.best_epoch - 1] if tlog.history else None
    if best is not None:
        print(f"trained {len(tlog.history)} epochs; best epoch {tlog.best_epoch} "
              f"val acc {best.val_accuracy:.4f} ({tlog.wall_time:.1f}s)")
    return 0


def cmd_features(cfg: RunConfig) -> int:
    model = load_brstm(cfg.path(MODEL_DIR))
    index = _load_split(cfg)
    for split in ("train", "val", "test"):
        recs = index.subset(split)
        x = _images(index, recs, _input_shape(model))
        feats = extract_features(model, x) if len(recs) else np.zeros((0, model.config.feature_width))
        write_features(cfg.path(f"features_{split}.csv"), feats, [r.label for r in recs])
        print(f"{split}: {len(recs)} x {model.config.feature_width} features")
    return 0


def cmd_train_ensemble(cfg: RunConfig) -> int:
    x, y = read_features(cfg.path("features_train.csv"))
    model = train_ensemble(x, y, svm_lambda=cfg.svm_lambda, svm_epochs=cfg.svm_epochs,
                           mlp_hidden=cfg.mlp_hidden, mlp_epochs=cfg.mlp_epochs, mlp_lr=cfg.mlp_lr,
                           ada_rounds=cfg.ada_rounds, seed=cfg.seed)
    save_ensemble(model, cfg.path(ENSEMBLE_DIR))
    print(f"ensemble trained on {len(x)} samples ({model.adaboost.rounds} boosting rounds)")
    return 0


def head_probability(model: BrstmModel, features: np.ndarray) -> np.ndarray:
    """Softmax-head P(parasitized) from penultimate features (inference mode)."""
    w, b = model["head.fc3.w"].data, model["head.fc3.b"].data
    logits = np.asarray(features, dtype=model.dtype) @ w + b
    return softmax(logits.astype(np.float64))[:, 1]


def score_table(model: BrstmModel, ensemble, features: np.ndarray) -> Dict[str, Dict[str, np.ndarray]]:
    """Scores and hard labels for the head, each classifier and the ensemble vote."""
    p_head = head_probability(model, features)
    pred = ensemble_predict(ensemble, features)
    table = {"head": {"score": p_head, "label": (p_head > 0.5).astype(np.int64)}}
    for name in ("svm", "mlp", "adaboost"):
        table[name] = {"score": pred.member_scores[name], "label": pred.member_labels[name]}
    table["ensemble"] = {"score": pred.score, "label": pred.labels}
    return table


def _curve_rows(curve):
    return [(t if np.isfinite(t) else "inf", x, y) for t, x, y in zip(curve.thresholds, curve.x, curve.y)]


def cmd_evaluate(cfg: RunConfig, split: str = "test") -> int:
    model = load_brstm(cfg.path(MODEL_DIR))
    ensemble = load_ensemble(cfg.path(ENSEMBLE_DIR))
    x, y = read_features(cfg.path(f"features_{split}.csv"))
    if len(y) == 0:
        raise DataError(f"split {split!r} has no samples")
    out_dir = cfg.path(REPORT_DIR)
    results = {}
    both = 0 < y.sum() < len(y)
    for name, entry in score_table(model, ensemble, x).items():
        rep = report(confusion(y, entry["label"])).to_dict()
        if both:
            roc, pr = roc_curve(entry["score"], y), pr_curve(entry["score"], y)
            rep["roc_auc"], rep["pr_auc"] = roc.auc, pr.auc
            write_csv(out_dir / f"roc_{name}_{split}.csv", ["threshold", "fpr", "tpr"], _curve_rows(roc))
            write_csv(out_dir / f"pr_{name}_{split}.csv", ["threshold", "recall", "precision"], _curve_rows(pr))
        else:
            log.warning("split %s is single-class; curves skipped", split)
            rep["roc_auc"] = rep["pr_auc"] = None
        results[name] = rep
    write_json(out_dir / f"metrics_{split}.json", {"split": split, "samples": int(len(y)), "models": results})
    for name, rep in results.items():
        print(f"{name:9s} accuracy {rep['accuracy']:7.3f}%  F {rep['f_score']:.4f}")
    return 0


def cmd_pca(cfg: RunConfig, split: str = "test") -> int:
    x, y = read_features(cfg.path(f"features_{split}.csv"))
    proj = pca_top3(x.astype(np.float64), labels=y)
    out_dir = cfg.path(REPORT_DIR)
    rows = [(c[0], c[1], c[2], int(label)) for c, label in zip(proj.coordinates, y)]
    write_csv(out_dir / f"pca_{split}.csv", ["pc1", "pc2", "pc3", "label"], rows)
    write_json(out_dir / f"pca_{split}.json", {
        "explained_variance": proj.explained_variance.tolist(),
        "explained_fraction": proj.explained_fraction.tolist(),
        "reduced_rank": proj.reduced_rank,
        "components": proj.components.tolist(),
    })
    print("explained variance fractions: " + ", ".join(f"{v:.4f}" for v in proj.explained_fraction))
    return 0


def _gather(paths: Sequence[Path]) -> List[Path]:
    files: List[Path] = []
    for p in paths:
        if p.is_dir():
            files.extend(sorted(f for f in p.rglob("*") if f.is_file() and f.suffix.lower() in IMAGE_SUFFIXES))
        elif p.is_file():
            files.append(p)
        else:
            raise DataError(f"no such image or directory: {p}")
    if not files:
        raise DataError("no images to predict")
    return files


def cmd_predict(cfg: RunConfig, paths: Sequence[Path], enhanced: bool = False, out=None) -> int:
    """Per-image labels and scores as CSV on standard output.

    Inputs are raw cell images unless ``enhanced`` is set, in which case
    they must already be enhanced grayscale images at the model input size.
    """
    out = out or sys.stdout
    model = load_brstm(cfg.path(MODEL_DIR))
    ens_dir = cfg.path(ENSEMBLE_DIR)
    ensemble = load_ensemble(ens_dir) if ens_dir.exists() else None
    files = _gather(paths)
    shape = _input_shape(model)
    batch = np.empty((len(files),) + shape, dtype=np.float32)
    for k, f in enumerate(files):
        img = load_enhanced(f) if enhanced else enhance_file(f, cfg.raw_size).astype(np.float32)
        if img.shape != shape:
            raise DataError(f"{f}: prepared image is {img.shape}, model expects {shape}")
        batch[k] = img
    feats = extract_features(model, batch)
    if ensemble is None:
        p = head_probability(model, feats)
        rows = [(str(f), int(s > 0.5), s) for f, s in zip(files, p)]
        out.write(csv_text(["path", "label", "head_score"], rows))
        return 0
    table = score_table(model, ensemble, feats)
    names = ("head", "svm", "mlp", "adaboost", "ensemble")
    header = ["path", "label"] + [f"{n}_score" for n in names]
    rows = [[str(f), int(table["ensemble"]["label"][k])] + [table[n]["score"][k] for n in names]
            for k, f in enumerate(files)]
    out.write(csv_text(header, rows))
    return 0

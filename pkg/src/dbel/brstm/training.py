"""Mini-batch SGD training, donor pre-training and auxiliary-branch transplant."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from dbel.brstm.config import BrstmConfig
from dbel.brstm.model import BrstmModel, build_model, forward, forward_all
from dbel.errors import DataError, DivergenceError, NumericError, TransplantError
from dbel.nn import OptimizerState, Tape, sgd_step, softmax_crossentropy
from dbel.preprocess.augment import random_augment

log = logging.getLogger(__name__)

Dataset = Tuple[np.ndarray, np.ndarray]


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_loss: float
    val_accuracy: float


@dataclass
class TrainLog:
    learning_rate: float
    momentum: float
    epochs: int
    batch_size: int
    seed: int
    history: List[EpochStats] = field(default_factory=list)
    best_epoch: int = 0
    wall_time: float = 0.0

    def to_dict(self) -> dict:
        """JSON-ready form. Wall time is left out so that logs are reproducible."""
        return {
            "header": {
                "learning_rate": self.learning_rate,
                "momentum": self.momentum,
                "epochs": self.epochs,
                "batch_size": self.batch_size,
                "seed": self.seed,
                "optimizer": "SGD",
                "loss": "cross-entropy",
            },
            "best_epoch": self.best_epoch,
            "history": [vars(s).copy() for s in self.history],
        }


@dataclass
class DonorModel:
    """A network of the target topology trained on an auxiliary task."""

    model: BrstmModel
    log: TrainLog

    def branch_weights(self) -> Dict[str, np.ndarray]:
        return {n: self.model[n].data.copy() for n in self.model.auxiliary_names()}


def _check_dataset(data: Dataset, name: str) -> Tuple[np.ndarray, np.ndarray]:
    images, labels = data
    images = np.asarray(images)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if len(images) == 0:
        raise DataError(f"{name} split is empty")
    if len(images) != len(labels):
        raise DataError(f"{name}: {len(images)} images but {len(labels)} labels")
    if np.any((labels != 0) & (labels != 1)):
        raise DataError(f"{name}: labels must be 0 or 1")
    if images.ndim == 4:
        images = images[:, 0]
    return images, labels


def evaluate(model: BrstmModel, images: np.ndarray, labels: np.ndarray, chunk: int = 64) -> Tuple[float, float]:
    """(accuracy, mean cross-entropy) in inference mode."""
    correct, total_loss = 0, 0.0
    for start in range(0, len(images), chunk):
        xb, yb = images[start:start + chunk], labels[start:start + chunk]
        logits = forward(model, xb[:, None])
        loss, probs = softmax_crossentropy(logits, yb)
        total_loss += float(loss.data) * len(yb)
        correct += int(np.sum(probs.argmax(axis=1) == yb))
    return correct / len(images), total_loss / len(images)


def train(
    model: BrstmModel,
    train_set: Dataset,
    val_set: Dataset,
    config: Optional[BrstmConfig] = None,
) -> TrainLog:
    """SGD with momentum on softmax cross-entropy; keeps the best-validation weights.

    Training samples are re-augmented every epoch when ``config.augment`` is
    set. "Best" is highest validation accuracy, ties broken by lower
    validation loss, then by the earlier epoch.
    """
    cfg = config or model.config
    x_train, y_train = _check_dataset(train_set, "train")
    x_val, y_val = _check_dataset(val_set, "validation")
    started = time.perf_counter()

    mean, std = float(x_train.mean()), float(x_train.std())
    model.set_standardization(mean, std)
    params = model.parameters()
    state = OptimizerState.for_params(params, cfg.learning_rate, cfg.momentum)
    tlog = TrainLog(cfg.learning_rate, cfg.momentum, cfg.epochs, cfg.batch_size, cfg.seed)
    log.info("training: lr=%g momentum=%g epochs=%d batch=%d", cfg.learning_rate, cfg.momentum,
             cfg.epochs, cfg.batch_size)

    best_key, best_snap = None, model.snapshot()
    n = len(x_train)
    for epoch in range(1, cfg.epochs + 1):
        rng = np.random.default_rng([cfg.seed, epoch])
        order = rng.permutation(n)
        loss_sum, correct = 0.0, 0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            xb = x_train[idx]
            if cfg.augment:
                xb = np.stack([random_augment(img, rng) for img in xb])
            yb = y_train[idx]
            tape = Tape()
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    logits = forward(model, xb[:, None], training=True, rng=rng, tape=tape)
                    loss, probs = softmax_crossentropy(logits, yb, tape=tape)
            except NumericError as exc:
                raise DivergenceError(f"epoch {epoch}, batch at {start}: {exc}") from exc
            with np.errstate(over="ignore", invalid="ignore"):
                tape.backward(loss)
                sgd_step(params, state)
            loss_sum += float(loss.data) * len(idx)
            correct += int(np.sum(probs.argmax(axis=1) == yb))
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                val_acc, val_loss = evaluate(model, x_val, y_val)
        except NumericError as exc:
            raise DivergenceError(f"epoch {epoch}, validation: {exc}") from exc
        if not np.isfinite(val_loss):
            raise DivergenceError(f"epoch {epoch}: validation loss is not finite")
        stats = EpochStats(epoch, loss_sum / n, correct / n, val_loss, val_acc)
        tlog.history.append(stats)
        log.info("epoch %d: loss %.4f acc %.3f val_acc %.3f", epoch, stats.train_loss,
                 stats.train_accuracy, val_acc)
        key = (val_acc, -val_loss)
        if best_key is None or key > best_key:
            best_key, best_snap, tlog.best_epoch = key, model.snapshot(), epoch
    model.restore(best_snap)
    tlog.wall_time = time.perf_counter() - started
    return tlog


def pretrain_donor(
    aux_images: np.ndarray,
    aux_labels: np.ndarray,
    config: BrstmConfig,
    seed: int = 0,
    epochs: int = 5,
) -> DonorModel:
    """Train a same-topology network on an auxiliary labelled set."""
    aux_images = np.asarray(aux_images)
    aux_labels = np.asarray(aux_labels)
    if len(aux_images) < 2:
        raise DataError("auxiliary dataset needs at least two samples")
    cfg = config.replace(epochs=epochs, seed=seed, augment=False)
    donor = build_model(cfg, seed=seed + 1)
    cut = max(1, int(round(0.8 * len(aux_images))))
    if cut == len(aux_images):
        cut -= 1
    tlog = train(donor, (aux_images[:cut], aux_labels[:cut]), (aux_images[cut:], aux_labels[cut:]), cfg)
    return DonorModel(donor, tlog)


def transplant_auxiliary(model: BrstmModel, donor: DonorModel) -> BrstmModel:
    """Copy the B and C branch weights of every STM block from ``donor`` and freeze them."""
    source = donor.model if isinstance(donor, DonorModel) else donor
    names = model.auxiliary_names()
    for name in names:
        if name not in source.params:
            raise TransplantError(f"donor has no parameter {name}")
        if source[name].shape != model[name].shape:
            raise TransplantError(f"{name}: donor shape {source[name].shape} != target {model[name].shape}")
    for name in names:
        target = model[name]
        target.data[...] = source[name].data
        target.frozen = True
        target.zero_grad()
    return model

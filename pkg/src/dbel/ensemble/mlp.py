"""One-hidden-layer perceptron built on the tensor core."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from dbel.ensemble.common import Standardizer, check_features, check_training_data
from dbel.nn import OptimizerState, Parameter, Tape, Tensor, dense, float64_mode, relu, sgd_step
from dbel.nn import softmax, softmax_crossentropy


@dataclass
class MlpClassifier:
    hidden_w: Parameter
    hidden_b: Parameter
    out_w: Parameter
    out_b: Parameter
    scaler: Standardizer

    @property
    def hidden(self) -> int:
        return self.hidden_b.shape[0]

    def _logits(self, x: np.ndarray, tape=None) -> Tensor:
        h = relu(dense(Tensor(x, dtype=np.float64), self.hidden_w, self.hidden_b, tape=tape), tape=tape)
        return dense(h, self.out_w, self.out_b, tape=tape)

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        x = self.scaler.transform(check_features(features, self.hidden_w.shape[0]))
        with float64_mode():
            return softmax(self._logits(x).data)

    def predict(self, features: np.ndarray) -> np.ndarray:
        return (self.predict_proba(features)[:, 1] > 0.5).astype(np.int64)

    def parameters(self):
        return [self.hidden_w, self.hidden_b, self.out_w, self.out_b]


def train_mlp(features, labels, hidden: int = 64, epochs: int = 100, lr: float = 0.01,
              momentum: float = 0.9, batch_size: int = 32, seed: int = 0) -> MlpClassifier:
    """d -> hidden (relu) -> 2 softmax, mini-batch SGD with momentum, 64-bit."""
    x, y = check_training_data(features, labels)
    scaler = Standardizer.fit(x)
    xs = scaler.transform(x)
    rng = np.random.default_rng(seed)
    d = xs.shape[1]
    with float64_mode():
        model = MlpClassifier(
            Parameter(rng.standard_normal((d, hidden)) * np.sqrt(2.0 / d), "mlp.hidden.w"),
            Parameter(np.zeros(hidden), "mlp.hidden.b"),
            Parameter(rng.standard_normal((hidden, 2)) * np.sqrt(1.0 / hidden), "mlp.out.w"),
            Parameter(np.zeros(2), "mlp.out.b"),
            scaler,
        )
        params = model.parameters()
        state = OptimizerState.for_params(params, lr, momentum)
        for _ in range(epochs):
            order = rng.permutation(len(xs))
            for start in range(0, len(xs), batch_size):
                idx = order[start:start + batch_size]
                tape = Tape()
                loss, _ = softmax_crossentropy(model._logits(xs[idx], tape=tape), y[idx], tape=tape)
                tape.backward(loss)
                sgd_step(params, state)
    return model

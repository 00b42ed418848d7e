"""Desk-scale training of a tiny convolutional segmenter.

The network is three 3x3 convolutions (1 -> 8 -> 8 -> 1 channels) with ReLU
between them and a sigmoid output, evaluated in float64 for exact gradient
checks. Losses are optimized in per-pixel mean form so the default step
sizes are stable across image sizes; the adaptive variant additionally
grows the per-harmonic loss weights from their own gradient after a
cross-entropy-only warm-up.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np
from numpy.lib.stride_tricks import as_strided
from scipy.special import expit

from .data import DatasetSplits, ShapeSample
from .errors import EmptyDataset, EmptyMask, InvalidParams
from .loss import (
    LossBreakdown,
    OmegaState,
    _boundary_distance_weight,
    active_contour_loss,
    cross_entropy,
    fourier_loss,
    hausdorff_penalty_loss,
    omega_gradient,
    update_omega,
)
from .metrics import confusion_counts, hausdorff_distance, scores, summarize_records

LOSS_KINDS = (
    "cross-entropy",
    "fourier-adaptive",
    "fourier-fixed",
    "hausdorff-penalty",
    "active-contour",
)

_LAYER_SHAPES = (
    ((8, 1, 3, 3), (8,)),
    ((8, 8, 3, 3), (8,)),
    ((1, 8, 3, 3), (1,)),
)

_IMPROVE_EPS = 1e-6


@dataclass
class TrainConfig:
    """Hyperparameters of one training run."""

    loss_kind: str = "cross-entropy"
    order: int = 2
    omega_init: tuple = (3.0, 1.0)
    param_lr: float = 5e-2
    omega_lr: float = 1e-3
    batch_size: int = 8
    max_epochs: int = 60
    patience: int | None = 10
    warmup_epochs: int = 5
    seed: int = 0
    match_mode: str = "largest"
    hausdorff_alpha: float = 0.2
    ac_lambda: float = 1.0

    def __post_init__(self):
        if self.loss_kind not in LOSS_KINDS:
            raise InvalidParams(f"unknown loss kind {self.loss_kind!r}")
        if self.order < 1:
            raise InvalidParams(f"order must be at least 1, got {self.order}")
        if len(self.omega_init) != self.order:
            raise InvalidParams(
                f"{len(self.omega_init)} initial weights for order {self.order}"
            )
        for name in ("param_lr", "omega_lr"):
            if getattr(self, name) <= 0.0:
                raise InvalidParams(f"{name} must be positive")
        for name in ("batch_size", "max_epochs"):
            if getattr(self, name) < 1:
                raise InvalidParams(f"{name} must be at least 1")
        if self.patience is not None and self.patience < 1:
            raise InvalidParams("patience must be at least 1 or None")
        if self.warmup_epochs < 0:
            raise InvalidParams("warmup_epochs must be nonnegative")

    @property
    def uses_fourier(self) -> bool:
        return self.loss_kind in ("fourier-adaptive", "fourier-fixed")

    def as_dict(self) -> dict:
        out = asdict(self)
        out["omega_init"] = list(self.omega_init)
        return out

    def config_hash(self) -> str:
        blob = json.dumps(self.as_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


class TinySegNet:
    """Flat-parameter three-layer convolutional segmenter."""

    def __init__(self, params: np.ndarray):
        expected = param_count()
        params = np.asarray(params, dtype=np.float64)
        if params.shape != (expected,):
            raise InvalidParams(f"expected {expected} parameters, got {params.shape}")
        self.params = params
        self.weights = []
        self.biases = []
        offset = 0
        for w_shape, b_shape in _LAYER_SHAPES:
            w_size = int(np.prod(w_shape))
            self.weights.append(self.params[offset : offset + w_size].reshape(w_shape))
            offset += w_size
            b_size = int(np.prod(b_shape))
            self.biases.append(self.params[offset : offset + b_size])
            offset += b_size

    @classmethod
    def init(cls, seed: int) -> "TinySegNet":
        """Uniform initialization on +-1/sqrt(fan_in) per layer."""
        rng = np.random.default_rng(seed)
        chunks = []
        for w_shape, b_shape in _LAYER_SHAPES:
            bound = 1.0 / np.sqrt(np.prod(w_shape[1:]))
            chunks.append(rng.uniform(-bound, bound, int(np.prod(w_shape))))
            chunks.append(rng.uniform(-bound, bound, int(np.prod(b_shape))))
        return cls(np.concatenate(chunks))

    def copy(self) -> "TinySegNet":
        return TinySegNet(self.params.copy())


def param_count() -> int:
    return sum(
        int(np.prod(w)) + int(np.prod(b)) for w, b in _LAYER_SHAPES
    )


def _im2col(x: np.ndarray) -> np.ndarray:
    """(B, C, H, W) -> (B*H*W, C*9) patches of the zero-padded input."""
    b, c, h, w = x.shape
    padded = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    sb, sc, sh, sw = padded.strides
    windows = as_strided(
        padded,
        shape=(b, h, w, c, 3, 3),
        strides=(sb, sh, sw, sc, sh, sw),
    )
    return windows.reshape(b * h * w, c * 9)


def _conv_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray):
    """Same-padding 3x3 convolution; returns the output and the patch matrix."""
    b, _, h, w = x.shape
    out_ch = weight.shape[0]
    cols = _im2col(x)
    out = cols @ weight.reshape(out_ch, -1).T + bias
    return out.reshape(b, h, w, out_ch).transpose(0, 3, 1, 2), cols


def _conv_backward(cols: np.ndarray, dz: np.ndarray, weight: np.ndarray, x_shape):
    """Gradients of a conv layer given its patch matrix and output gradient."""
    b, _, h, w = x_shape
    out_ch, in_ch = weight.shape[:2]
    dz_mat = dz.transpose(0, 2, 3, 1).reshape(b * h * w, out_ch)
    d_weight = (dz_mat.T @ cols).reshape(weight.shape)
    d_bias = dz_mat.sum(axis=0)
    # input gradient is correlation of dz with the flipped kernels
    dz_cols = _im2col(dz)
    flipped = weight[:, :, ::-1, ::-1].transpose(1, 0, 2, 3).reshape(in_ch, -1)
    dx = (dz_cols @ flipped.T).reshape(b, h, w, in_ch).transpose(0, 3, 1, 2)
    return d_weight, d_bias, dx


def _forward_batch(net: TinySegNet, images: np.ndarray, dtype=np.float64):
    """Forward a (B, H, W) stack; returns probabilities and the cache needed
    for backpropagation.

    dtype float32 roughly halves the patch-copy and matmul cost and is used
    inside the training loop; the float64 default keeps the public forward
    and backward paths exact enough for finite-difference checks.
    """
    x = images[:, None, :, :].astype(dtype, copy=False)
    weights = [w.astype(dtype, copy=False) for w in net.weights]
    biases = [b.astype(dtype, copy=False) for b in net.biases]
    z1, cols1 = _conv_forward(x, weights[0], biases[0])
    a1 = np.maximum(z1, 0.0)
    z2, cols2 = _conv_forward(a1, weights[1], biases[1])
    a2 = np.maximum(z2, 0.0)
    z3, cols3 = _conv_forward(a2, weights[2], biases[2])
    probs = expit(z3[:, 0])
    cache = {
        "dtype": dtype,
        "x_shape": x.shape,
        "cols1": cols1,
        "cols2": cols2,
        "cols3": cols3,
        "z1": z1,
        "z2": z2,
    }
    return probs, cache


def _backward_batch(net: TinySegNet, cache: dict, dz3: np.ndarray) -> np.ndarray:
    """Flat float64 parameter gradient from the logit gradient dz3 (B, H, W)."""
    b, _, h, w = cache["x_shape"]
    dtype = cache["dtype"]
    dz3 = dz3.astype(dtype, copy=False)[:, None, :, :]
    w3 = net.weights[2].astype(dtype, copy=False)
    w2 = net.weights[1].astype(dtype, copy=False)
    dw3, db3, da2 = _conv_backward(cache["cols3"], dz3, w3, (b, 8, h, w))
    dz2 = da2 * (cache["z2"] > 0.0)
    dw2, db2, da1 = _conv_backward(cache["cols2"], dz2, w2, (b, 8, h, w))
    dz1 = da1 * (cache["z1"] > 0.0)
    dz1_mat = dz1.transpose(0, 2, 3, 1).reshape(b * h * w, 8)
    dw1 = (dz1_mat.T @ cache["cols1"]).reshape(net.weights[0].shape)
    db1 = dz1_mat.sum(axis=0)
    return np.concatenate(
        [
            dw1.ravel(),
            db1,
            dw2.ravel(),
            db2,
            dw3.ravel(),
            db3.ravel(),
        ]
    ).astype(np.float64, copy=False)


def forward(net: TinySegNet, image: np.ndarray) -> np.ndarray:
    """Probability map for one (H, W) image or a (B, H, W) stack."""
    arr = np.asarray(image, dtype=np.float64)
    single = arr.ndim == 2
    if single:
        arr = arr[None]
    probs, _ = _forward_batch(net, arr)
    return probs[0] if single else probs


def training_objective(
    probs: np.ndarray,
    gt: np.ndarray,
    loss_kind: str,
    beta: float = 0.0,
    hausdorff_alpha: float = 0.2,
    ac_lambda: float = 1.0,
) -> float:
    """Per-pixel mean objective optimized during training.

    For the fourier kinds, beta is the precomputed amplitude-gap weight of
    this image and is treated as a constant during backpropagation.
    """
    pixels = probs.size
    if loss_kind == "cross-entropy":
        return cross_entropy(probs, gt) / pixels
    if loss_kind in ("fourier-adaptive", "fourier-fixed"):
        return (1.0 + beta) * cross_entropy(probs, gt) / pixels
    if loss_kind == "hausdorff-penalty":
        return hausdorff_penalty_loss(probs, gt, hausdorff_alpha) / pixels
    if loss_kind == "active-contour":
        return active_contour_loss(probs, gt, ac_lambda) / pixels
    raise InvalidParams(f"unknown loss kind {loss_kind!r}")


def _logit_gradient(
    probs: np.ndarray,
    gt: np.ndarray,
    loss_kind: str,
    beta,
    hausdorff_alpha: float,
    ac_lambda: float,
) -> np.ndarray:
    """Gradient of the mean objective with respect to the output logits.

    probs and gt are (B, H, W); beta is scalar or per-image of shape (B,).
    """
    pixels = probs[0].size
    target = gt.astype(probs.dtype)
    if loss_kind == "cross-entropy":
        return (probs - target) / pixels
    if loss_kind in ("fourier-adaptive", "fourier-fixed"):
        scale = np.asarray(beta, dtype=probs.dtype).reshape(-1, 1, 1)
        return (1.0 + scale) * (probs - target) / pixels
    if loss_kind == "hausdorff-penalty":
        d_probs = np.empty_like(probs)
        for i in range(probs.shape[0]):
            weight = _boundary_distance_weight(
                gt[i].astype(np.uint8), hausdorff_alpha
            )
            d_probs[i] = 2.0 * (probs[i] - target[i]) * weight / pixels
        return d_probs * probs * (1.0 - probs)
    if loss_kind == "active-contour":
        d_probs = _active_contour_prob_gradient(probs, target, ac_lambda) / pixels
        return d_probs * probs * (1.0 - probs)
    raise InvalidParams(f"unknown loss kind {loss_kind!r}")


def _active_contour_prob_gradient(
    probs: np.ndarray, target: np.ndarray, lam: float
) -> np.ndarray:
    """d/du of the active contour loss, batched over the leading axis."""
    grad_row = np.zeros_like(probs)
    grad_col = np.zeros_like(probs)
    grad_row[:, :-1, :] = probs[:, 1:, :] - probs[:, :-1, :]
    grad_col[:, :, :-1] = probs[:, :, 1:] - probs[:, :, :-1]
    mag = np.sqrt(grad_row**2 + grad_col**2 + 1e-8)
    t_row = grad_row / mag
    t_col = grad_col / mag
    d_len = -(t_row + t_col)
    d_len[:, 1:, :] += t_row[:, :-1, :]
    d_len[:, :, 1:] += t_col[:, :, :-1]
    # region sums are strictly positive for sigmoid outputs, so the absolute
    # values pass the gradient through unchanged
    d_region = (target - 1.0) ** 2 - target**2
    return d_len + lam * d_region


def backward(
    net: TinySegNet,
    image: np.ndarray,
    gt: np.ndarray,
    loss_kind: str,
    beta: float = 0.0,
    hausdorff_alpha: float = 0.2,
    ac_lambda: float = 1.0,
) -> np.ndarray:
    """Flat gradient of the mean training objective for one image."""
    arr = np.asarray(image, dtype=np.float64)[None]
    gt_arr = np.asarray(gt)[None]
    probs, cache = _forward_batch(net, arr)
    dz3 = _logit_gradient(probs, gt_arr, loss_kind, beta, hausdorff_alpha, ac_lambda)
    return _backward_batch(net, cache, dz3)


@dataclass
class RunLog:
    """Epoch-by-epoch record of one training run."""

    records: list = field(default_factory=list)
    stopped_epoch: int = 0
    stop_reason: str = ""
    best_epoch: int = 0

    def write_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            for record in self.records:
                fh.write(json.dumps(record) + "\n")
            fh.write(
                json.dumps(
                    {
                        "stopped_epoch": self.stopped_epoch,
                        "stop_reason": self.stop_reason,
                        "best_epoch": self.best_epoch,
                    }
                )
                + "\n"
            )


def _image_fourier_terms(
    probs: np.ndarray, sample_gt: np.ndarray, omega: OmegaState, config: TrainConfig
) -> LossBreakdown:
    return fourier_loss(
        probs, sample_gt, omega, config.order, config.match_mode
    )


def _batched(items: list, size: int):
    for start in range(0, len(items), size):
        yield items[start : start + size]


def _validation_pass(
    net: TinySegNet,
    samples: list[ShapeSample],
    config: TrainConfig,
    stop_omega: np.ndarray,
):
    """Validation fourier loss, metric summary and mean per-harmonic gaps.

    stop_omega selects which fourier loss the run watches: zero for plain
    cross-entropy training (the collapse identity makes that the same
    number as the validation cross entropy), the current omega for the
    adaptive kind, and the configured initial omega otherwise.
    """
    losses = []
    gap_sums = np.zeros(config.order)
    records = []
    for chunk in _batched(samples, config.batch_size):
        images = np.stack([s.image for s in chunk])
        probs, _ = _forward_batch(net, images, dtype=np.float32)
        for i, sample in enumerate(chunk):
            p = probs[i]
            breakdown = fourier_loss(
                p, sample.mask, stop_omega, config.order, config.match_mode
            )
            losses.append(breakdown.total / p.size)
            gap_sums += breakdown.per_harmonic_gaps
            hard = (p > 0.5).astype(np.uint8)
            quality = scores(confusion_counts(sample.mask, hard))
            try:
                haus = hausdorff_distance(sample.mask, hard)
            except EmptyMask:
                haus = None
            records.append(
                {
                    "image_id": None,
                    "precision": quality.precision,
                    "recall": quality.recall,
                    "fscore": quality.fscore,
                    "iou": quality.iou,
                    "hausdorff": haus,
                }
            )
    summary = summarize_records(records)
    gap_means = (gap_sums / len(samples)).tolist()
    return math.fsum(losses) / len(losses), summary, gap_means


def train(config: TrainConfig, dataset: DatasetSplits) -> tuple[TinySegNet, RunLog]:
    """Minibatch gradient descent with warm-up, early stopping and optional
    adaptive per-harmonic weights.

    Early stopping watches the run's validation fourier loss: at the live
    omega for the adaptive kind, at the initial omega for the fixed kind and
    the non-fourier baselines, and at omega = 0 (which is exactly the
    validation cross entropy) for plain cross-entropy training. The returned
    network carries the weights of the epoch with the best validation IoU,
    recorded in RunLog.best_epoch. The epoch-0 record holds the untouched
    initial network's validation state, so runs sharing a seed agree there
    regardless of loss kind.
    """
    if not dataset.train or not dataset.val:
        raise EmptyDataset("training needs nonempty train and val splits")

    net = TinySegNet.init(config.seed)
    shuffle_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 1]))
    omega = (
        OmegaState(np.asarray(config.omega_init, dtype=np.float64), config.omega_lr)
        if config.uses_fourier
        else None
    )
    if config.loss_kind == "cross-entropy":
        stop_omega = np.zeros(config.order)
    elif config.loss_kind == "fourier-adaptive":
        stop_omega = omega  # live view; fourier_loss reads its current value
    else:
        stop_omega = np.asarray(config.omega_init, dtype=np.float64)

    log = RunLog()
    best_loss = np.inf
    best_iou = -np.inf
    best_params = net.params.copy()
    best_epoch = 0
    since_best = 0

    def record_epoch(epoch: int, train_loss):
        val_loss, summary, gap_means = _validation_pass(
            net, dataset.val, config, stop_omega
        )
        log.records.append(
            {
                "epoch": epoch,
                "train_loss": train_loss,
                "val_fourier_loss": val_loss,
                "val_precision": summary["precision"][0],
                "val_recall": summary["recall"][0],
                "val_fscore": summary["fscore"][0],
                "val_iou": summary["iou"][0],
                "val_hausdorff": summary["hausdorff"][0],
                "val_hausdorff_undefined": summary["hausdorff_undefined"],
                "omegas": omega.omegas.tolist() if omega is not None else None,
                "val_gap_means": gap_means,
            }
        )
        return val_loss, summary["iou"][0]

    record_epoch(0, None)

    stop_reason = "max_epochs"
    stopped_epoch = config.max_epochs
    for epoch in range(1, config.max_epochs + 1):
        in_warmup = epoch <= config.warmup_epochs and config.uses_fourier
        order_ids = shuffle_rng.permutation(len(dataset.train))
        epoch_losses = []
        for batch_ids in _batched(list(order_ids), config.batch_size):
            batch = [dataset.train[i] for i in batch_ids]
            images = np.stack([s.image for s in batch])
            gts = np.stack([s.mask for s in batch])
            probs, cache = _forward_batch(net, images, dtype=np.float32)

            if config.uses_fourier and not in_warmup:
                betas = np.empty(len(batch))
                grad_terms = []
                for i, sample in enumerate(batch):
                    breakdown = _image_fourier_terms(
                        probs[i], sample.mask, omega, config
                    )
                    betas[i] = breakdown.beta
                    mean_ce = breakdown.ce / probs[i].size
                    grad_terms.append(
                        omega_gradient(mean_ce, breakdown.per_harmonic_gaps)
                    )
                    epoch_losses.append(breakdown.total / probs[i].size)
                # compensated summation keeps the batch aggregate independent
                # of image order
                omega_grads = np.array(
                    [
                        math.fsum(term[k] for term in grad_terms)
                        for k in range(config.order)
                    ]
                )
                dz3 = _logit_gradient(
                    probs, gts, config.loss_kind, betas,
                    config.hausdorff_alpha, config.ac_lambda,
                )
                if config.loss_kind == "fourier-adaptive":
                    update_omega(omega, omega_grads)
            else:
                kind = "cross-entropy" if config.uses_fourier else config.loss_kind
                for i in range(len(batch)):
                    epoch_losses.append(
                        training_objective(
                            probs[i],
                            gts[i],
                            kind,
                            hausdorff_alpha=config.hausdorff_alpha,
                            ac_lambda=config.ac_lambda,
                        )
                    )
                dz3 = _logit_gradient(
                    probs, gts, kind, 0.0,
                    config.hausdorff_alpha, config.ac_lambda,
                )
            grad = _backward_batch(net, cache, dz3) / len(batch)
            net.params -= config.param_lr * grad

        val_loss, val_iou = record_epoch(
            epoch, math.fsum(epoch_losses) / len(epoch_losses)
        )

        # model selection is on validation IoU; the loss only drives stopping
        if val_iou > best_iou:
            best_iou = val_iou
            best_params = net.params.copy()
            best_epoch = epoch

        if val_loss < best_loss - _IMPROVE_EPS:
            best_loss = val_loss
            since_best = 0
        else:
            since_best += 1
            if config.patience is not None and since_best >= config.patience:
                stop_reason = "early_stopping"
                stopped_epoch = epoch
                break

    log.stopped_epoch = stopped_epoch
    log.stop_reason = stop_reason
    log.best_epoch = best_epoch
    net.params[:] = best_params
    return net, log


def evaluate(samples: list[ShapeSample], predict) -> tuple[list[dict], dict]:
    """Per-image metric records and their summary for a predictor.

    predict maps a ShapeSample to a probability map; predictions are
    thresholded strictly above 0.5. Images where either side is empty get a
    None (undefined) Hausdorff distance that the summary reports separately.
    """
    if not samples:
        raise EmptyDataset("no samples to evaluate")
    records = []
    for index, sample in enumerate(samples):
        probs = predict(sample)
        hard = (np.asarray(probs) > 0.5).astype(np.uint8)
        quality = scores(confusion_counts(sample.mask, hard))
        try:
            haus = hausdorff_distance(sample.mask, hard)
        except EmptyMask:
            haus = None
        records.append(
            {
                "image_id": index,
                "precision": quality.precision,
                "recall": quality.recall,
                "fscore": quality.fscore,
                "iou": quality.iou,
                "hausdorff": haus,
            }
        )
    return records, summarize_records(records)


def net_predictor(net: TinySegNet):
    """Adapter from a trained network to the evaluate() predictor protocol."""

    def predict(sample: ShapeSample) -> np.ndarray:
        return forward(net, sample.image)

    return predict


def save_model(path, net: TinySegNet, config: TrainConfig | None = None) -> None:
    """Write a model as one JSON header line plus little-endian float64
    parameters."""
    header = {
        "format": "fouriershape-net",
        "version": 1,
        "param_count": int(net.params.size),
        "layer_shapes": [[list(w), list(b)] for w, b in _LAYER_SHAPES],
    }
    if config is not None:
        header["config"] = config.as_dict()
        header["config_hash"] = config.config_hash()
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode() + b"\n")
        fh.write(net.params.astype("<f8").tobytes())


def load_model(path) -> tuple[TinySegNet, dict]:
    """Read a model written by save_model."""
    with open(path, "rb") as fh:
        header_line = fh.readline()
        raw = fh.read()
    header = json.loads(header_line.decode())
    if header.get("format") != "fouriershape-net":
        raise InvalidParams(f"{path} is not a saved model")
    params = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    if params.size != header["param_count"]:
        raise InvalidParams(
            f"{path}: expected {header['param_count']} parameters, found {params.size}"
        )
    return TinySegNet(params), header

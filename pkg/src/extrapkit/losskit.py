"""Loss kernels with analytic gradients, objective combiners and a
finite-difference gradient checker.

Every kernel returns a :class:`LossEval`. ``grad`` has the shape of the
prediction argument, or is a tuple/list of arrays when a loss depends on
several predictions. Probabilities are clamped to ``[EPS, 1 - EPS]`` before
any log, and the gradient is zero wherever the clamp is active.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import InvalidInputError
from .panopticlab import CenterOffsetField

EPS = 1e-7


class LossEval(NamedTuple):
    value: float
    grad: object


class GradCheckError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ObjectiveWeights:
    lambda_fl: float = 5.0
    lambda_ce: float = 5.0
    lambda_fm: float = 1.0
    lambda_vgg: float = 10.0
    lambda_kld: float = 0.05
    gamma: float = 5.0

    def __post_init__(self):
        for name, v in vars(self).items():
            if not np.isfinite(v) or v < 0:
                raise InvalidInputError(f"{name} must be finite and >= 0, got {v}")

    @classmethod
    def stage2(cls, **overrides) -> "ObjectiveWeights":
        return cls(**{"lambda_fm": 1.0, **overrides})

    @classmethod
    def stage4(cls, **overrides) -> "ObjectiveWeights":
        return cls(**{"lambda_fm": 10.0, "lambda_vgg": 10.0, "lambda_kld": 0.05, **overrides})

    @classmethod
    def from_config(cls, loss_cfg, stage: int) -> "ObjectiveWeights":
        """Weights for stage 2 or 4 from a :class:`~extrapkit.config.LossConfig`."""
        if stage not in (2, 4):
            raise InvalidInputError(f"stage must be 2 or 4, got {stage}")
        fm = loss_cfg.lambda_fm_stage2 if stage == 2 else loss_cfg.lambda_fm_stage4
        return cls(loss_cfg.lambda_fl, loss_cfg.lambda_ce, fm, loss_cfg.lambda_vgg,
                   loss_cfg.lambda_kld, loss_cfg.gamma)


def _pair(z, y):
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if z.shape != y.shape:
        raise InvalidInputError(f"prediction {z.shape} and target {y.shape} differ")
    return z, y


def _clamp(z):
    zc = np.clip(z, EPS, 1.0 - EPS)
    return zc, (z >= EPS) & (z <= 1.0 - EPS)


def ce_one_sided(z, y) -> LossEval:
    """Sum of ``-y log z`` over all elements."""
    z, y = _pair(z, y)
    zc, live = _clamp(z)
    value = np.sum(-y * np.log(zc))
    grad = np.where(live, -y / zc, 0.0)
    return LossEval(float(value), grad)


def focal(z, y, gamma: float = 5.0) -> LossEval:
    """Sum of ``-y log(z) (1 - z)^gamma``; identical to CE at gamma = 0."""
    if gamma < 0:
        raise InvalidInputError(f"gamma must be >= 0, got {gamma}")
    z, y = _pair(z, y)
    zc, live = _clamp(z)
    ce = -y * np.log(zc)
    w = (1.0 - zc) ** gamma
    value = np.sum(ce * w)
    dw = 0.0 if gamma == 0 else -gamma * (1.0 - zc) ** (gamma - 1.0)
    grad = np.where(live, (-y / zc) * w + ce * dw, 0.0)
    return LossEval(float(value), grad)


def bce(z, y) -> LossEval:
    z, y = _pair(z, y)
    zc, live = _clamp(z)
    value = np.sum(-(y * np.log(zc) + (1.0 - y) * np.log(1.0 - zc)))
    grad = np.where(live, -(y / zc - (1.0 - y) / (1.0 - zc)), 0.0)
    return LossEval(float(value), grad)


def boundary_ce(z, y, kind: str = "bce") -> LossEval:
    """Cross entropy on the boundary channel, binary or one-sided."""
    if kind == "bce":
        return bce(z, y)
    if kind == "ce":
        return ce_one_sided(z, y)
    raise InvalidInputError(f"boundary loss must be 'bce' or 'ce', got {kind!r}")


def lsgan(scores, target: float) -> LossEval:
    """Least-squares GAN loss; use target 1 for real (and generator), 0 for fake."""
    s = np.asarray(scores, dtype=np.float64)
    diff = s - target
    return LossEval(float(np.mean(diff * diff)), 2.0 * diff / s.size)


def hinge_gan(scores_real, scores_fake, role: str = "discriminator") -> LossEval:
    """Hinge GAN loss. ``grad`` is ``(d_real, d_fake)``.

    The generator role ignores ``scores_real`` and its ``d_real`` is zero.
    """
    fake = np.asarray(scores_fake, dtype=np.float64)
    if role == "generator":
        d_real = None if scores_real is None else np.zeros(np.shape(scores_real))
        return LossEval(float(-np.mean(fake)), (d_real, np.full(fake.shape, -1.0 / fake.size)))
    if role != "discriminator":
        raise InvalidInputError(f"unknown role {role!r}")
    real = np.asarray(scores_real, dtype=np.float64)
    value = np.mean(np.maximum(0.0, 1.0 - real)) + np.mean(np.maximum(0.0, 1.0 + fake))
    d_real = np.where(1.0 - real > 0, -1.0 / real.size, 0.0)
    d_fake = np.where(1.0 + fake > 0, 1.0 / fake.size, 0.0)
    return LossEval(float(value), (d_real, d_fake))


def feature_matching(real_feats, fake_feats) -> LossEval:
    """Per-layer mean absolute difference summed over layers; grad w.r.t. fake."""
    if len(real_feats) != len(fake_feats):
        raise InvalidInputError(
            f"{len(real_feats)} real layers vs {len(fake_feats)} fake layers")
    value = 0.0
    grads = []
    for real, fake in zip(real_feats, fake_feats):
        fake, real = _pair(fake, real)
        diff = fake - real
        value += np.sum(np.abs(diff)) / diff.size
        grads.append(np.sign(diff) / diff.size)
    return LossEval(float(value), grads)


def perceptual_l1(feats_a, feats_b) -> LossEval:
    """L1 aggregation of externally extracted features; grad w.r.t. ``feats_b``."""
    return feature_matching(feats_a, feats_b)


def kld_gaussian(mu, logvar) -> LossEval:
    """KL divergence from N(mu, exp(logvar)) to N(0, 1). ``grad`` is ``(d_mu, d_logvar)``."""
    mu, logvar = _pair(mu, logvar)
    ev = np.exp(logvar)
    value = 0.5 * np.sum(mu * mu + ev - logvar - 1.0)
    return LossEval(float(value), (mu.copy(), 0.5 * (ev - 1.0)))


def cooccur_nll(score) -> LossEval:
    """``-log`` of the patch discriminator's score on a generated patch."""
    s = np.asarray(score, dtype=np.float64)
    sc, live = _clamp(s)
    grad = np.where(live, -1.0 / sc, 0.0)
    return LossEval(float(np.sum(-np.log(sc))), grad)


def center_offset_loss(pred: CenterOffsetField, gt: CenterOffsetField,
                       w_center: float = 200.0, w_offset: float = 0.01) -> LossEval:
    """Weighted L2 heatmap loss plus L1 offset loss over supervised pixels.

    The offset term averages over the ``thing_mask`` of ``gt`` (all pixels if
    it is None). ``grad`` is ``(d_heatmap, d_offsets)``.
    """
    if pred.heatmap.shape != gt.heatmap.shape:
        raise InvalidInputError(
            f"prediction {pred.heatmap.shape} and target {gt.heatmap.shape} differ")
    dh = pred.heatmap - gt.heatmap
    center = np.mean(dh * dh)
    d_heat = w_center * 2.0 * dh / dh.size
    mask = np.ones(dh.shape, bool) if gt.thing_mask is None else gt.thing_mask
    n = 2 * int(mask.sum())
    do = pred.offsets - gt.offsets
    if n:
        offset = np.sum(np.abs(do[mask])) / n
        d_off = np.where(mask[..., None], np.sign(do) / n, 0.0) * w_offset
    else:
        offset = 0.0
        d_off = np.zeros_like(do)
    return LossEval(float(w_center * center + w_offset * offset), (d_heat, d_off))


def stage2_objective(gan: float, fm: float, fl: float, ce: float,
                     w: ObjectiveWeights | None = None) -> float:
    """Label-extrapolation generator objective."""
    w = ObjectiveWeights.stage2() if w is None else w
    return gan + w.lambda_fm * fm + w.lambda_fl * fl + w.lambda_ce * ce


def stage4_objective(gan: float, fm: float, vgg: float, kld: float, cooccur: float,
                     w: ObjectiveWeights | None = None) -> float:
    """Image-synthesis generator objective; the co-occurrence term is unweighted."""
    w = ObjectiveWeights.stage4() if w is None else w
    return gan + w.lambda_fm * fm + w.lambda_vgg * vgg + w.lambda_kld * kld + cooccur


def grad_check(loss: Callable[[np.ndarray], LossEval], point, epsilon: float = 1e-5) -> float:
    """Largest relative error between ``loss(point).grad`` and central differences.

    Relative error per coordinate is ``|g - g_fd| / max(1e-12, |g| + |g_fd|)``.
    """
    if epsilon <= 0:
        raise InvalidInputError("epsilon must be positive")
    x = np.array(point, dtype=np.float64)
    res = loss(x)
    if not np.isfinite(res.value):
        raise GradCheckError(f"loss is not finite at the base point: {res.value}")
    g = np.asarray(res.grad, dtype=np.float64)
    if g.shape != x.shape:
        raise InvalidInputError(f"gradient shape {g.shape} differs from point {x.shape}")
    flat = x.reshape(-1)
    fd = np.empty(flat.size)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + epsilon
        up = loss(x).value
        flat[i] = orig - epsilon
        down = loss(x).value
        flat[i] = orig
        if not (np.isfinite(up) and np.isfinite(down)):
            raise GradCheckError(f"loss is not finite when probing coordinate {i}")
        fd[i] = (up - down) / (2.0 * epsilon)
    ga = g.reshape(-1)
    rel = np.abs(ga - fd) / np.maximum(1e-12, np.abs(ga) + np.abs(fd))
    return float(rel.max()) if rel.size else 0.0

"""Triplet-loss training of the identity embedder."""

from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

from ..seeding import rng_for
from .tcn import ModelWeights, backward_batch, forward_batch

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    margin: float = 0.5
    speakers_per_batch: int = 8  # P
    snippets_per_speaker: int = 4  # K
    steps: int = 300
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    mining: str = "semi_hard"
    crop_samples: int = 8192
    seed: int = 0

    def __post_init__(self):
        if self.margin <= 0:
            raise ValueError("margin must be positive")
        if self.speakers_per_batch < 2 or self.snippets_per_speaker < 2:
            raise ValueError("need P >= 2 speakers and K >= 2 snippets per batch")
        if self.mining not in ("all", "semi_hard"):
            raise ValueError(f"unknown mining strategy {self.mining!r}")


@dataclass(frozen=True)
class TripletBatch:
    anchors: np.ndarray  # indices into the embedding batch
    positives: np.ndarray
    negatives: np.ndarray


def triplet_loss(a, p, n, margin: float) -> float:
    a, p, n = (np.asarray(v, dtype=np.float64) for v in (a, p, n))
    return max(0.0, float(np.linalg.norm(a - p) - np.linalg.norm(a - n) + margin))


def pairwise_distances(emb: np.ndarray) -> np.ndarray:
    diff = emb[:, None, :] - emb[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def mine_triplets(emb: np.ndarray, labels, strategy: str = "semi_hard", margin: float = 0.5) -> TripletBatch:
    """Select (anchor, positive, negative) index triplets from a labelled batch.

    ``all`` enumerates every ordered anchor-positive pair with every negative.
    ``semi_hard`` keeps one negative per pair: the closest one farther than the
    positive but within the margin, else the closest negative overall.
    """
    labels = np.asarray(labels)
    if len(set(labels.tolist())) < 2:
        raise ValueError("triplet mining needs at least two speakers")
    dist = pairwise_distances(np.asarray(emb, dtype=np.float64))
    same = labels[:, None] == labels[None, :]
    A, P, N = [], [], []
    for a in range(len(labels)):
        negs = np.flatnonzero(~same[a])
        for p in np.flatnonzero(same[a]):
            if p == a:
                continue
            if strategy == "all":
                A.extend([a] * negs.size)
                P.extend([p] * negs.size)
                N.extend(negs.tolist())
                continue
            dap = dist[a, p]
            dn = dist[a, negs]
            band = (dn > dap) & (dn < dap + margin)
            pick = negs[band][np.argmin(dn[band])] if band.any() else negs[np.argmin(dn)]
            A.append(a)
            P.append(p)
            N.append(int(pick))
    if not A:
        raise ValueError("no valid triplet: no speaker has two snippets in the batch")
    return TripletBatch(np.array(A), np.array(P), np.array(N))


def triplet_loss_and_grad(emb: np.ndarray, triplets: TripletBatch, margin: float):
    """Mean hinge loss over the triplets and its gradient w.r.t. ``emb``."""
    a, p, n = emb[triplets.anchors], emb[triplets.positives], emb[triplets.negatives]
    dap_vec, dan_vec = a - p, a - n
    dap = np.sqrt((dap_vec ** 2).sum(-1))
    dan = np.sqrt((dan_vec ** 2).sum(-1))
    hinge = dap - dan + margin
    active = hinge > 0
    m = len(hinge)
    loss = float(np.where(active, hinge, 0.0).sum() / m)
    tiny = np.finfo(emb.dtype).tiny
    gp = dap_vec / np.maximum(dap, tiny)[:, None] * (active / m)[:, None]
    gn = dan_vec / np.maximum(dan, tiny)[:, None] * (active / m)[:, None]
    grad = np.zeros_like(emb)
    np.add.at(grad, triplets.anchors, gp - gn)
    np.add.at(grad, triplets.positives, -gp)
    np.add.at(grad, triplets.negatives, gn)
    return loss, grad


def pooled_forward(params, cfg, x):
    """Pooled (and optionally normalized) snippet embeddings plus backprop state."""
    v, cache = forward_batch(params, cfg, x, keep_cache=True)
    p = v.mean(axis=1)
    if cfg.l2_normalize_output:
        pn = np.maximum(np.sqrt((p * p).sum(-1, keepdims=True)), np.finfo(p.dtype).tiny)
        e = p / pn
    else:
        pn, e = None, p
    return e, (cache, pn, e, v.shape[1])


def pooled_backward(params, cfg, state, de):
    cache, pn, e, n_frames = state
    if cfg.l2_normalize_output:
        dp = (de - e * (e * de).sum(-1, keepdims=True)) / pn
    else:
        dp = de
    dv = np.repeat(dp[:, None, :] / n_frames, n_frames, axis=1)
    return backward_batch(params, cfg, cache, dv)


def batch_loss_and_grads(params, cfg, x, labels, margin, mining):
    emb, state = pooled_forward(params, cfg, x)
    triplets = mine_triplets(emb, labels, mining, margin)
    loss, de = triplet_loss_and_grad(emb, triplets, margin)
    return loss, pooled_backward(params, cfg, state, de.astype(emb.dtype))


class Adam:
    def __init__(self, params, lr, beta1, beta2, eps):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = OrderedDict((k, np.zeros_like(v)) for k, v in params.items())
        self.v = OrderedDict((k, np.zeros_like(v)) for k, v in params.items())
        self.t = 0

    def step(self, params, grads):
        if self.lr == 0:
            return
        self.t += 1
        c1 = 1 - self.b1 ** self.t
        c2 = 1 - self.b2 ** self.t
        for k in params:
            g = grads[k]
            self.m[k] = self.b1 * self.m[k] + (1 - self.b1) * g
            self.v[k] = self.b2 * self.v[k] + (1 - self.b2) * g * g
            upd = self.lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)
            params[k] = (params[k] - upd).astype(params[k].dtype)


def _sample_batch(audio_by_speaker, speakers, tc: TrainConfig, rng: np.random.Generator):
    chosen = rng.choice(len(speakers), size=tc.speakers_per_batch, replace=False)
    rows, labels = [], []
    for si in chosen:
        clips = audio_by_speaker[speakers[si]]
        for ci in rng.choice(len(clips), size=tc.snippets_per_speaker, replace=False):
            clip = clips[ci]
            if clip.size >= tc.crop_samples:
                start = int(rng.integers(0, clip.size - tc.crop_samples + 1))
                rows.append(clip[start:start + tc.crop_samples])
            else:
                rows.append(np.pad(clip, (0, tc.crop_samples - clip.size)))
            labels.append(speakers[si])
    return np.stack(rows), np.array(labels)


def train(weights: ModelWeights, train_config: TrainConfig, audio_by_speaker: dict[str, list[np.ndarray]]):
    """Fit the embedder on 16 kHz clips grouped by speaker.

    Each step draws P speakers and K random crops per speaker, mines triplets
    on the pooled embeddings and takes one Adam step.  Returns the new weights
    and the per-step loss trace.
    """
    tc = train_config
    speakers = sorted(s for s, clips in audio_by_speaker.items() if len(clips) >= tc.snippets_per_speaker)
    if len(speakers) < tc.speakers_per_batch:
        raise ValueError(f"corpus too small: {len(speakers)} speakers with >= {tc.snippets_per_speaker} "
                         f"snippets, need {tc.speakers_per_batch}")
    cfg = weights.config
    if tc.crop_samples < cfg.frame_hop_samples:
        raise ValueError("crop_samples shorter than one embedder frame")
    out = weights.copy()
    dtype = next(iter(out.params.values())).dtype
    clips = {s: [np.asarray(c, dtype=dtype) for c in audio_by_speaker[s]] for s in speakers}
    opt = Adam(out.params, tc.learning_rate, tc.beta1, tc.beta2, tc.eps)
    rng = rng_for(tc.seed, "embedder/train")
    trace = []
    for step in range(tc.steps):
        x, labels = _sample_batch(clips, speakers, tc, rng)
        loss, grads = batch_loss_and_grads(out.params, cfg, x, labels, tc.margin, tc.mining)
        opt.step(out.params, grads)
        trace.append(loss)
        if step % 50 == 0:
            log.info("step %d loss %.4f", step, loss)
    return out, np.array(trace)

"""Pair construction and N-way one-shot episode sampling.

Identical pairs carry label 0, different pairs label 1. The identical set
includes self-pairs (j may equal k) and the different set counts one
ordering only, lower pattern index first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from absgen.datasets import LabeledDataset
from absgen.errors import ContractError

IDENTICAL, DIFFERENT = 0, 1


@dataclass(frozen=True)
class EpisodeSpec:
    n_way: int
    k_shot: int = 1
    queries_per_class: int = 1

    def __post_init__(self):
        if self.n_way < 2:
            raise ContractError(f"n_way must be >= 2, got {self.n_way}")
        if self.k_shot != 1:
            raise ContractError(f"only 1-shot episodes are supported, got k_shot {self.k_shot}")
        if self.queries_per_class < 1:
            raise ContractError(f"queries_per_class must be >= 1, got {self.queries_per_class}")


def filter_classes(ds: LabeledDataset, keep) -> LabeledDataset:
    """Restrict to the listed pattern ids, re-indexed 0..len(keep)-1 in order."""
    keep = list(keep)
    if not keep:
        raise ContractError("filter_classes needs a nonempty keep list")
    present = set(np.unique(ds.labels).tolist())
    for label in keep:
        if label not in present:
            raise ContractError(f"unknown pattern id {label}; dataset has {sorted(present)}")
    if len(set(keep)) != len(keep):
        raise ContractError(f"duplicate pattern ids in keep list {keep}")
    remap = {old: new for new, old in enumerate(keep)}
    mask = np.isin(ds.labels, keep)
    labels = np.array([remap[int(l)] for l in ds.labels[mask]], dtype=np.int64)
    names = [ds.class_names[i] if i < len(ds.class_names) else str(i) for i in keep]
    return LabeledDataset(ds.samples[mask], labels, split=ds.split,
                          class_names=names if ds.class_names else [],
                          unit_range=ds.unit_range)


def enumerate_pair_counts(ds: LabeledDataset):
    """Closed-form sizes (|X_iden|, |X_diff|) of the two ordered-pair sets."""
    counts = ds.counts()
    if len(counts) < 2:
        raise ContractError(f"pair enumeration needs >= 2 patterns, got {len(counts)}")
    if np.any(counts == 0):
        raise ContractError(f"every pattern needs >= 1 sample, counts are {counts.tolist()}")
    n = counts.astype(np.int64)
    n_iden = int(np.sum(n * n))
    n_diff = 0
    for i in range(len(n)):
        for j in range(i + 1, len(n)):
            n_diff += int(n[i] * n[j])
    return n_iden, n_diff


def sample_pairs(ds: LabeledDataset, count: int, rng, balance: float = 0.5,
                 allow_self_pairs: bool = True):
    """Draw ``count`` pairs: round(count*balance) identical, rest different.

    Returns (a, b, labels) sample arrays; pairs are uniform over their
    respective sets and different pairs put the lower pattern first.
    """
    if count < 1:
        raise ContractError(f"count must be >= 1, got {count}")
    if not 0.0 < balance < 1.0:
        raise ContractError(f"balance must lie strictly inside (0, 1), got {balance}")
    counts = ds.counts()
    if len(counts) < 2 or np.any(counts == 0):
        raise ContractError(f"pair sampling needs >= 2 nonempty patterns, counts {counts.tolist()}")
    if not allow_self_pairs and np.all(counts < 2):
        raise ContractError("no pattern has >= 2 samples and self-pairs are disabled")

    n_iden = int(count * balance + 0.5)
    n_diff = count - n_iden
    by_class = [ds.indices_of(c) for c in range(len(counts))]

    # identical pairs: pick the class proportional to its share of X_iden
    weights = counts.astype(float) ** 2
    if not allow_self_pairs:
        weights = counts.astype(float) * (counts - 1)
    weights = weights / weights.sum()
    ia, ib = [], []
    classes = rng.choice(len(counts), size=n_iden, p=weights)
    for c in classes:
        pool = by_class[c]
        first = rng.integers(len(pool))
        if allow_self_pairs:
            second = rng.integers(len(pool))
        else:
            second = (first + 1 + rng.integers(len(pool) - 1)) % len(pool)
        ia.append(pool[first])
        ib.append(pool[second])

    # different pairs: class pair (i < j) proportional to n_i * n_j
    pair_ids, pair_weights = [], []
    for i in range(len(counts)):
        for j in range(i + 1, len(counts)):
            pair_ids.append((i, j))
            pair_weights.append(counts[i] * counts[j])
    pair_weights = np.asarray(pair_weights, float)
    pair_weights = pair_weights / pair_weights.sum()
    da, db = [], []
    picks = rng.choice(len(pair_ids), size=n_diff, p=pair_weights)
    for p in picks:
        i, j = pair_ids[p]
        da.append(by_class[i][rng.integers(counts[i])])
        db.append(by_class[j][rng.integers(counts[j])])

    idx_a = np.array(ia + da, dtype=np.int64)
    idx_b = np.array(ib + db, dtype=np.int64)
    labels = np.concatenate([np.zeros(n_iden), np.ones(n_diff)])
    return ds.samples[idx_a], ds.samples[idx_b], labels


def make_pair_sampler(ds: LabeledDataset, balance: float = 0.5,
                      allow_self_pairs: bool = True, swap_augment: bool = False):
    """Adapter matching the training loop's ``sampler(rng, count)`` signature.

    With ``swap_augment`` each different pair keeps its canonical
    lower-pattern-first order with probability 1/2 and is swapped
    otherwise; swapped pairs carry label -1 instead of +1 so a
    signed-distance model learns the mirrored side of the identical-pair
    level set. Identical pairs always keep label 0. Off by default.
    """

    def sampler(rng, count):
        a, b, labels = sample_pairs(ds, count, rng, balance=balance,
                                    allow_self_pairs=allow_self_pairs)
        if not swap_augment:
            return a, b, labels
        labels = labels.astype(float)
        swap = (labels == DIFFERENT) & (rng.random(len(labels)) < 0.5)
        sel = swap.reshape((-1,) + (1,) * (a.ndim - 1))
        a, b = np.where(sel, b, a), np.where(sel, a, b)
        labels[swap] = -1.0
        return a, b, labels

    return sampler


def sample_episode(ds: LabeledDataset, spec: EpisodeSpec, rng):
    """One N-way one-shot episode: per-class templates plus labeled queries.

    Returns (support, queries, query_labels) where support[k] is the
    template of episode class k and query labels index into support.
    """
    counts = ds.counts()
    needed = spec.k_shot + spec.queries_per_class
    eligible = np.flatnonzero(counts >= needed)
    if spec.n_way > len(np.flatnonzero(counts > 0)):
        raise ContractError(
            f"n_way {spec.n_way} exceeds the {len(np.flatnonzero(counts > 0))} available patterns"
        )
    if len(eligible) < spec.n_way:
        raise ContractError(
            f"only {len(eligible)} patterns have the {needed} samples an episode needs"
        )
    chosen = rng.choice(eligible, size=spec.n_way, replace=False)
    support, queries, query_labels = [], [], []
    for slot, c in enumerate(chosen):
        pool = ds.indices_of(int(c))
        picked = rng.choice(pool, size=needed, replace=False)
        support.append(ds.samples[picked[0]])
        for q in picked[1:]:
            queries.append(ds.samples[q])
            query_labels.append(slot)
    return np.stack(support), np.stack(queries), np.array(query_labels, dtype=np.int64)

"""Seeded synthetic dataset generators shared across the test suite."""

import csv

import numpy as np

from safs import DiscreteDataset, FeatureSchema, SubgroupDescriptor

PLANTED_CONSTRAINTS = {0: frozenset({0}), 1: frozenset({0, 1}), 2: frozenset({0})}


def make_dataset(cards, codes, y, names=None):
    names = names or [f"f{i:02d}" for i in range(len(cards))]
    schemas = [FeatureSchema(name, tuple(str(v) for v in range(c)))
               for name, c in zip(names, cards)]
    return DiscreteDataset(schemas, np.asarray(codes), np.asarray(y))


def planted_dataset(seed, n=5000, n_noise=9, inside_rate=0.8, background=0.2):
    """3 signal features (3 values each) defining a planted subgroup, plus
    binary noise features.

    Binary noise keeps the per-value association magnitudes of noise features
    exactly symmetric, so their sparsity score is 0 and the signal features
    separate cleanly.
    """
    rng = np.random.default_rng(seed)
    cards = [3, 3, 3] + [2] * n_noise
    codes = np.column_stack([rng.integers(0, c, n) for c in cards])
    inside = ((codes[:, 0] == 0) & np.isin(codes[:, 1], (0, 1)) & (codes[:, 2] == 0))
    y = (rng.random(n) < np.where(inside, inside_rate, background)).astype(np.int8)
    descriptor = SubgroupDescriptor(PLANTED_CONSTRAINTS)
    return make_dataset(cards, codes, y), descriptor, inside


def noise_dataset(seed, n=120, m=3, card=3, rate=0.3):
    """Outcome independent of every feature."""
    rng = np.random.default_rng(seed)
    codes = np.column_stack([rng.integers(0, card, n) for _ in range(m)])
    y = (rng.random(n) < rate).astype(np.int8)
    if y.sum() in (0, n):
        y[0] = 1 - y[0]
    return make_dataset([card] * m, codes, y)


def random_dataset(seed, n=200, n_features=4, max_card=3):
    """Random per-cell outcome effects: structured but unplanted."""
    rng = np.random.default_rng(seed)
    cards = [int(c) for c in rng.integers(2, max_card + 1, n_features)]
    codes = np.column_stack([rng.integers(0, c, n) for c in cards])
    effects = [rng.normal(0, 0.8, c) for c in cards]
    logits = sum(e[codes[:, i]] for i, e in enumerate(effects)) - 1.0
    y = (rng.random(n) < 1.0 / (1.0 + np.exp(-logits))).astype(np.int8)
    if y.sum() in (0, n):
        y[0] = 1 - y[0]
    return make_dataset(cards, codes, y)


def write_csv(path, dataset, outcome_name="y"):
    """Dump a dataset back to CSV with decoded labels."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([s.name for s in dataset.schemas] + [outcome_name])
        for i in range(dataset.n_records):
            row = [dataset.decode(m, dataset.codes[i, m])
                   for m in range(dataset.n_features)]
            writer.writerow(row + [int(dataset.outcome[i])])

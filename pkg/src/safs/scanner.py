"""Multi-dimensional subset scanning over AND-of-ORs subgroups.

Maximizes a Bernoulli likelihood-ratio statistic via coordinate ascent with
random restarts. Each coordinate step finds the optimal value subset of one
feature by rate-sorted prefix evaluation (the linear-time subset scanning
property). An exhaustive oracle is provided for small instances.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dataset import DiscreteDataset, constraints_bool_mask
from .errors import DataError, SearchSpaceError

OVER = "over"
UNDER = "under"

_EPS = 1e-12
_BRUTE_FORCE_GUARD = 10_000_000


def _check_direction(direction: str) -> None:
    if direction not in (OVER, UNDER):
        raise DataError(f"direction must be {OVER!r} or {UNDER!r}, got {direction!r}")


class SubgroupDescriptor:
    """AND-of-ORs subgroup: feature index -> non-empty set of included codes.

    Only constrained features appear; a constraint covering all of a
    feature's categories is vacuous and should be normalized away via
    :meth:`normalize`.
    """

    __slots__ = ("constraints",)

    def __init__(self, constraints: Mapping[int, Iterable[int]] = ()):
        items = dict(constraints)
        norm: dict[int, frozenset[int]] = {}
        for feature in sorted(items):
            values = frozenset(int(v) for v in items[feature])
            if not values:
                raise DataError(f"empty value set for feature {feature}")
            norm[int(feature)] = values
        self.constraints = norm

    def normalize(self, dataset: DiscreteDataset) -> "SubgroupDescriptor":
        """Drop constraints that include every category of their feature."""
        kept = {f: vs for f, vs in self.constraints.items()
                if len(vs) < dataset.schemas[f].cardinality}
        return SubgroupDescriptor(kept)

    def replace(self, feature: int, values: frozenset[int] | None) -> "SubgroupDescriptor":
        """New descriptor with one feature's constraint set or removed."""
        new = dict(self.constraints)
        if values is None:
            new.pop(feature, None)
        else:
            new[feature] = values
        return SubgroupDescriptor(new)

    def canonical(self) -> tuple:
        return tuple((f, tuple(sorted(vs))) for f, vs in sorted(self.constraints.items()))

    def sort_key(self) -> tuple:
        """Tie-break key: fewer constrained features, fewer total values,
        then lexicographic."""
        return (len(self.constraints),
                sum(len(vs) for vs in self.constraints.values()),
                self.canonical())

    @property
    def n_features(self) -> int:
        return len(self.constraints)

    @property
    def n_values(self) -> int:
        return sum(len(vs) for vs in self.constraints.values())

    def to_labels(self, dataset: DiscreteDataset) -> dict[str, list[str]]:
        return {dataset.schemas[f].name: [dataset.decode(f, v) for v in sorted(vs)]
                for f, vs in self.constraints.items()}

    def __eq__(self, other) -> bool:
        return isinstance(other, SubgroupDescriptor) and self.canonical() == other.canonical()

    def __hash__(self) -> int:
        return hash(self.canonical())

    def __repr__(self) -> str:
        return f"SubgroupDescriptor({self.constraints!r})"


@dataclass(frozen=True)
class ScanConfig:
    direction: str = OVER
    restarts: int = 10
    max_passes: int = 50
    seed: int = 0

    def __post_init__(self):
        _check_direction(self.direction)
        if self.restarts < 1:
            raise DataError("restarts must be >= 1")
        if self.max_passes < 1:
            raise DataError("max_passes must be >= 1")


@dataclass(frozen=True)
class ScanResult:
    descriptor: SubgroupDescriptor
    score: float
    q_hat: float
    matched: np.ndarray = field(repr=False)
    subset_size: int
    subset_outcome_sum: int
    elapsed: float


def q_mle(n_s: int, sum_y: int, mu: float) -> float:
    """Closed-form maximizer of the Bernoulli likelihood-ratio score.

    Returns +inf when the subgroup is all-positive and 0 when all-negative;
    callers clamp per scan direction.
    """
    if not 0 < mu < 1:
        raise DataError(f"global outcome rate must be in (0, 1), got {mu}")
    if n_s < 1 or not 0 <= sum_y <= n_s:
        raise DataError(f"invalid subgroup counts n_s={n_s}, sum_y={sum_y}")
    if sum_y == n_s:
        return math.inf
    return (sum_y * (1.0 - mu)) / (mu * (n_s - sum_y))


def _score_counts(n_s: int, sum_y: int, mu: float, direction: str) -> tuple[float, float]:
    """(score, clamped q_hat) for aggregate subgroup counts."""
    q = q_mle(n_s, sum_y, mu)
    if direction == OVER:
        if q <= 1.0:
            return 0.0, 1.0
        if math.isinf(q):
            # limit of the score as q -> inf with sum_y == n_s
            return -n_s * math.log(mu), math.inf
    else:
        if q >= 1.0:
            return 0.0, 1.0
        if q == 0.0:
            # limit as q -> 0 with sum_y == 0
            return -n_s * math.log(1.0 - mu), 0.0
    return math.log(q) * sum_y - n_s * math.log(1.0 - mu + q * mu), q


def _score_counts_vec(n_s: np.ndarray, sum_y: np.ndarray, mu: float,
                      direction: str) -> np.ndarray:
    """Vectorized score for arrays of aggregate counts (n_s >= 1)."""
    n_s = n_s.astype(np.float64)
    sum_y = sum_y.astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = (sum_y * (1.0 - mu)) / (mu * (n_s - sum_y))
    if direction == OVER:
        limit = sum_y == n_s  # q -> inf branch, score has an analytic limit
        q_eff = np.where(limit | (q <= 1.0), 1.0, q)
        limit_score = -n_s * math.log(mu)
    else:
        limit = sum_y == 0  # q -> 0 branch
        q_eff = np.where(limit | (q >= 1.0), 1.0, q)
        limit_score = -n_s * math.log(1.0 - mu)
    scores = np.where(q_eff != 1.0,
                      np.log(q_eff) * sum_y - n_s * np.log(1.0 - mu + q_eff * mu),
                      0.0)
    return np.where(limit, limit_score, scores)


def _checked_mu(dataset: DiscreteDataset) -> float:
    mu = dataset.outcome_mean
    if not 0 < mu < 1:
        raise DataError("outcome is degenerate (all 0 or all 1); nothing to scan for")
    return mu


def score_subgroup(dataset: DiscreteDataset, descriptor: SubgroupDescriptor,
                   direction: str = OVER) -> tuple[float, float]:
    """Likelihood-ratio score and clamped q_hat for one subgroup."""
    _check_direction(direction)
    mu = _checked_mu(dataset)
    mask = constraints_bool_mask(dataset, descriptor.constraints)
    n_s = int(mask.sum())
    if n_s == 0:
        raise DataError("descriptor matches no records")
    sum_y = int(dataset.outcome[mask].sum())
    return _score_counts(n_s, sum_y, mu, direction)


def optimize_feature(dataset: DiscreteDataset, descriptor: SubgroupDescriptor,
                     feature: int, direction: str = OVER) -> frozenset[int] | None:
    """Best included-value set for one feature, all other constraints fixed.

    Values are sorted by outcome rate among records matching the other
    constraints; every prefix is scored and the best one returned. None means
    the constraint is dropped (the best prefix covers every supported value).
    Never worse than any other value subset, including the current one.
    """
    _check_direction(direction)
    mu = _checked_mu(dataset)
    others = descriptor.replace(feature, None)
    mask = constraints_bool_mask(dataset, others.constraints)
    if not mask.any():
        raise DataError("no records match the remaining constraints")
    codes = dataset.codes[:, feature][mask]
    y = dataset.outcome[mask].astype(np.float64)
    c = dataset.schemas[feature].cardinality
    counts = np.bincount(codes, minlength=c).astype(np.float64)
    sums = np.bincount(codes, weights=y, minlength=c)
    supported = np.flatnonzero(counts > 0)
    rates = sums[supported] / counts[supported]
    sign = -1.0 if direction == OVER else 1.0
    order = supported[np.lexsort((supported, sign * rates))]
    n_s = np.cumsum(counts[order])
    sum_y = np.cumsum(sums[order])
    scores = _score_counts_vec(n_s, sum_y, mu, direction)
    best = int(scores.argmax())  # ties -> shortest prefix
    if scores[-1] >= scores[best] - _EPS:
        return None  # all supported values: constraint is vacuous
    return frozenset(int(v) for v in order[: best + 1])


def _random_descriptor(dataset: DiscreteDataset, features: Sequence[int],
                       rng: np.random.Generator) -> SubgroupDescriptor:
    """Uniformly random non-empty value subset per feature, normalized."""
    constraints = {}
    for f in features:
        c = dataset.schemas[f].cardinality
        while True:
            picks = np.flatnonzero(rng.random(c) < 0.5)
            if picks.size:
                break
        if picks.size < c:
            constraints[f] = frozenset(int(v) for v in picks)
    return SubgroupDescriptor(constraints)


def _result_from(dataset: DiscreteDataset, descriptor: SubgroupDescriptor,
                 direction: str, elapsed: float) -> ScanResult:
    score, q_hat = score_subgroup(dataset, descriptor, direction)
    mask = constraints_bool_mask(dataset, descriptor.constraints)
    matched = np.flatnonzero(mask)
    return ScanResult(descriptor=descriptor, score=score, q_hat=q_hat,
                      matched=matched, subset_size=int(matched.size),
                      subset_outcome_sum=int(dataset.outcome[mask].sum()),
                      elapsed=elapsed)


def _ascend(dataset: DiscreteDataset, descriptor: SubgroupDescriptor,
            features: Sequence[int], direction: str, max_passes: int,
            rng: np.random.Generator) -> tuple[SubgroupDescriptor, float]:
    """Coordinate ascent from one starting descriptor to a local maximum."""
    score, _ = score_subgroup(dataset, descriptor, direction)
    for _ in range(max_passes):
        start = score
        for f in rng.permutation(np.asarray(features)):
            new_set = optimize_feature(dataset, descriptor, int(f), direction)
            descriptor = descriptor.replace(int(f), new_set)
            score, _ = score_subgroup(dataset, descriptor, direction)
        if score <= start + _EPS:
            break
    return descriptor, score


def _validate_features(dataset: DiscreteDataset, features: Sequence[int]) -> list[int]:
    feats = [int(f) for f in features]
    if not feats:
        raise DataError("feature list is empty")
    if len(set(feats)) != len(feats):
        raise DataError("feature list contains duplicates")
    for f in feats:
        if not 0 <= f < dataset.n_features:
            raise DataError(f"feature index {f} out of range")
    return feats


def scan(dataset: DiscreteDataset, features: Sequence[int],
         config: ScanConfig = ScanConfig()) -> ScanResult:
    """Best divergent subgroup over the given features.

    The first restart starts from the unconstrained subgroup, subsequent ones
    from random value subsets; each restart runs coordinate ascent over a
    freshly shuffled feature order until a full pass brings no improvement.
    Deterministic given the seed.
    """
    feats = _validate_features(dataset, features)
    _checked_mu(dataset)
    t0 = time.perf_counter()
    children = np.random.SeedSequence(config.seed).spawn(config.restarts)
    best: tuple[float, tuple, SubgroupDescriptor] | None = None
    for r in range(config.restarts):
        rng = np.random.default_rng(children[r])
        if r == 0:
            start = SubgroupDescriptor()
        else:
            for _ in range(100):
                start = _random_descriptor(dataset, feats, rng)
                if constraints_bool_mask(dataset, start.constraints).any():
                    break
            else:
                start = SubgroupDescriptor()
        descriptor, score = _ascend(dataset, start, feats, config.direction,
                                    config.max_passes, rng)
        key = descriptor.sort_key()
        if best is None or score > best[0] + _EPS or \
                (score > best[0] - _EPS and key < best[1]):
            best = (score, key, descriptor)
    return _result_from(dataset, best[2], config.direction,
                        time.perf_counter() - t0)


def _popcount(x: int) -> int:
    return x.bit_count()


def _bits_from_bool(mask: np.ndarray) -> int:
    """Pack a boolean record mask into an arbitrary-precision bitmask."""
    return int.from_bytes(np.packbits(mask, bitorder="little").tobytes(), "little")


def brute_force_scan(dataset: DiscreteDataset, features: Sequence[int],
                     direction: str = OVER) -> ScanResult:
    """Exhaustive oracle: enumerate every AND-of-ORs descriptor over the
    given features and return the max-score one.

    Ties go to fewer constrained features, then fewer values, then
    lexicographic. Guarded against search spaces above 10^7 descriptors.
    """
    _check_direction(direction)
    feats = _validate_features(dataset, features)
    mu = _checked_mu(dataset)
    space = 1
    for f in feats:
        space *= (1 << dataset.schemas[f].cardinality) - 1
        if space > _BRUTE_FORCE_GUARD:
            raise SearchSpaceError(f"search space exceeds {_BRUTE_FORCE_GUARD} descriptors")

    t0 = time.perf_counter()
    n = dataset.n_records
    all_ones = (1 << n) - 1
    y_bits = _bits_from_bool(dataset.outcome != 0)

    # per feature: list of (included values or None, record bitmask)
    options: list[list[tuple[frozenset[int] | None, int]]] = []
    for f in feats:
        c = dataset.schemas[f].cardinality
        value_bits = [_bits_from_bool(dataset.codes[:, f] == v) for v in range(c)]
        opts: list[tuple[frozenset[int] | None, int]] = [(None, all_ones)]
        for k in range(1, (1 << c) - 1):
            bits = 0
            for v in range(c):
                if k >> v & 1:
                    bits |= value_bits[v]
            opts.append((frozenset(v for v in range(c) if k >> v & 1), bits))
        options.append(opts)

    best_score = -math.inf
    best_key = None
    best_desc = None
    for combo in itertools.product(*options):
        mask = all_ones
        for _, bits in combo:
            mask &= bits
        n_s = _popcount(mask)
        if n_s == 0:
            continue
        sum_y = _popcount(mask & y_bits)
        score, _ = _score_counts(n_s, sum_y, mu, direction)
        if score > best_score + _EPS:
            best_score, best_key, best_desc = score, None, combo
        elif score > best_score - _EPS:
            desc = SubgroupDescriptor({f: vs for f, (vs, _) in zip(feats, combo)
                                       if vs is not None})
            if best_key is None:
                best_key = SubgroupDescriptor(
                    {f: vs for f, (vs, _) in zip(feats, best_desc)
                     if vs is not None}).sort_key()
            if desc.sort_key() < best_key:
                best_score, best_key, best_desc = score, desc.sort_key(), combo

    descriptor = SubgroupDescriptor({f: vs for f, (vs, _) in zip(feats, best_desc)
                                     if vs is not None})
    return _result_from(dataset, descriptor, direction, time.perf_counter() - t0)

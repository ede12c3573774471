"""Discrete-choice framing of initiations.

Every initiation becomes a choice instance: the initiator picks one receiver
from a risk set of candidates, represented by the actual receiver plus a
small uniform sample of negatives. Feature vectors are assembled against the
graph state strictly before the initiation, so nothing about the choice leaks
into its own features.

The module also houses a synthetic growth generator: a sequential process in
which a uniformly drawn chooser picks a receiver by softmax over true
coefficients, used to validate the conditional-logit estimator end to end.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .authors import _ZERO_ACTIVITY, AuthorDirectory, ROLE_MIXED, ROLE_PATIENT
from .graph import TemporalGraph

FEATURE_NAMES = (
    "censored_log_target_outdegree",
    "target_has_indegree",
    "censored_log_target_indegree",
    "is_reciprocal",
    "is_weakly_connected",
    "is_friend_of_friend",
    "target_author_type_mixed",
    "target_author_type_p",
    "is_author_type_shared",
    "is_health_condition_shared",
    "target_is_multisite_author",
    "target_is_mixedsite_author",
    "target_update_count",
    "target_update_frequency",
    "target_days_since_most_recent_update",
    "target_days_since_first_update",
)
STATE_FEATURE = "is_state_assignment_shared"

NETWORK_FEATURE_NAMES = FEATURE_NAMES[:6]


class UnknownCandidateError(ValueError):
    """The candidate is not an activated author at the requested time."""


@dataclass
class ChoiceInstance:
    """One initiation framed as a discrete choice over sampled alternatives."""

    chooser: object
    time: int
    alternatives: list
    chosen: int
    X: np.ndarray
    feature_names: tuple

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        if len(self.alternatives) < 2:
            raise ValueError("a choice needs at least 2 alternatives")
        if not 0 <= self.chosen < len(self.alternatives):
            raise ValueError("chosen index out of range")
        if self.X.shape != (len(self.alternatives), len(self.feature_names)):
            raise ValueError(f"feature matrix shape {self.X.shape} does not match instance")
        if not np.isfinite(self.X).all():
            raise ValueError("feature matrix contains non-finite values")


@dataclass(frozen=True)
class SamplerConfig:
    """Negative-sampling settings; 24 negatives is the package default."""

    n_negatives: int = 24
    seed: int = 0

    def __post_init__(self):
        if self.n_negatives < 1:
            raise ValueError("n_negatives must be >= 1")


@dataclass(frozen=True)
class SkippedChoice:
    """An initiation that could not become a choice instance, with the reason."""

    initiator: object
    receiver: object
    time: int
    reason: str


def eligible_candidates(graph: TemporalGraph, directory: AuthorDirectory | None, chooser, t) -> set:
    """Risk set at time ``t``: authors activated strictly before ``t``.

    Activation is the earlier of the first update and the first interaction,
    so authors who only ever interact are still eligible targets. The chooser
    and the chooser's existing targets are excluded — an initiation is by
    definition a first edge. Advances the graph cursor to ``t``.
    """
    graph.advance_to(t)
    candidates = set(graph.nodes_activated_before(t))
    if directory is not None:
        candidates.update(directory.authors_first_update_before(t))
    candidates.discard(chooser)
    candidates -= graph.out_neighbors(chooser)
    return candidates


def sample_negatives(pool, n: int, seed) -> list:
    """Uniform sample without replacement; the whole pool if it is small.

    Deterministic for a given seed, and prefix-stable: the n-sample is a
    prefix of the (n+1)-sample under the same seed, so enlarging a choice set
    never reshuffles what was already drawn.
    """
    ordered = sorted(pool)
    if not ordered:
        return []
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(ordered))
    take = min(n, len(ordered))
    return [ordered[i] for i in perm[:take]]


def censored_log(x: float, minimum: float) -> float:
    """log(max(x, minimum)); keeps zero-degree candidates representable."""
    return math.log(max(x, minimum))


def build_features(
    chooser,
    candidate,
    t,
    graph: TemporalGraph,
    directory: AuthorDirectory | None,
    include_state: bool = False,
) -> np.ndarray:
    """Feature vector for one (chooser, candidate) pair at time ``t``.

    Advances the graph cursor to ``t`` (it must not already be past it).
    Dimension is 16, or 17 with the shared-state dummy enabled.
    """
    graph.advance_to(t)
    if directory is None or candidate not in directory:
        if graph.activation_time(candidate) is None:
            raise UnknownCandidateError(f"candidate {candidate!r} has no activity at any time")
    out_deg = graph.out_degree(candidate)
    in_deg = graph.in_degree(candidate)
    role = directory.role(candidate) if directory is not None else None
    chooser_role = directory.role(chooser) if directory is not None else None
    if directory is not None:
        activity = directory.activity_features(candidate, t)
        shared_condition = directory.shared_condition(chooser, candidate)
    else:
        activity = _ZERO_ACTIVITY
        shared_condition = 0
    values = [
        censored_log(out_deg, 1.0),
        float(in_deg > 0),
        censored_log(in_deg, 1.0),
        float(graph.has_edge(candidate, chooser)),
        float(graph.same_wcc(chooser, candidate)),
        float(graph.is_friend_of_friend(chooser, candidate)),
        float(role == ROLE_MIXED),
        float(role == ROLE_PATIENT),
        float(role is not None and role == chooser_role),
        float(shared_condition),
        float(activity.is_multisite),
        float(activity.is_mixedsite),
        float(activity.update_count),
        activity.update_frequency,
        activity.days_since_most_recent_update,
        activity.days_since_first_update,
    ]
    if include_state:
        values.append(float(directory.shared_state(chooser, candidate)) if directory is not None else 0.0)
    return np.array(values, dtype=np.float64)


def feature_names(include_state: bool = False) -> tuple:
    return FEATURE_NAMES + (STATE_FEATURE,) if include_state else FEATURE_NAMES


def build_choice_sets(
    initiations,
    graph: TemporalGraph,
    directory: AuthorDirectory | None,
    sampler: SamplerConfig,
    include_state: bool = False,
) -> tuple[list[ChoiceInstance], list[SkippedChoice]]:
    """Replay initiations chronologically into sampled choice instances.

    The graph must be freshly built (not yet advanced): each instance's
    features reflect the state strictly before its initiation. Initiations
    whose receiver is not yet an eligible candidate, or with no negative
    left to sample, are skipped and reported.
    """
    names = feature_names(include_state)
    instances: list[ChoiceInstance] = []
    skipped: list[SkippedChoice] = []
    for index, ini in enumerate(initiations):
        chooser, receiver, t = ini.initiator, ini.receiver, ini.time
        graph.advance_to(t)
        eligible = eligible_candidates(graph, directory, chooser, t)
        if receiver not in eligible:
            skipped.append(SkippedChoice(chooser, receiver, t, "receiver_not_eligible"))
            continue
        pool = eligible
        pool.discard(receiver)
        if not pool:
            skipped.append(SkippedChoice(chooser, receiver, t, "no_negatives"))
            continue
        negatives = sample_negatives(pool, sampler.n_negatives, np.random.SeedSequence(sampler.seed, spawn_key=(index,)))
        alternatives = [receiver] + negatives
        X = np.vstack([build_features(chooser, alt, t, graph, directory, include_state) for alt in alternatives])
        instances.append(
            ChoiceInstance(chooser=chooser, time=t, alternatives=alternatives, chosen=0, X=X, feature_names=names)
        )
    return instances, skipped


def temporal_split(instances, train_fraction: float, window=None):
    """Calendar split at a time quantile of the analysis window.

    The boundary sits at ``start + train_fraction * (end - start)``; instances
    strictly before it train, the rest test. The window defaults to the
    instances' time span.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    if not instances:
        return [], []
    if window is None:
        times = [inst.time for inst in instances]
        window = (min(times), max(times))
    start, end = window
    if end < start:
        raise ValueError("window end precedes start")
    boundary = start + train_fraction * (end - start)
    train = [inst for inst in instances if inst.time < boundary]
    test = [inst for inst in instances if inst.time >= boundary]
    return train, test


@dataclass(frozen=True)
class SynthConfig:
    """Settings for the synthetic sequential-growth generator."""

    beta_true: tuple = (1.0, -0.5)
    n_authors: int = 200
    n_choices: int = 1000
    candidate_pool_size: int = 25
    seed: int = 0
    feature_names: tuple = ("is_friend_of_friend", "censored_log_target_indegree")

    def __post_init__(self):
        if len(self.beta_true) != len(self.feature_names):
            raise ValueError("beta_true length must match feature_names")
        if self.n_authors < 3 or self.candidate_pool_size < 2:
            raise ValueError("need at least 3 authors and pool size >= 2")
        unknown = set(self.feature_names) - set(FEATURE_NAMES) - {STATE_FEATURE}
        if unknown:
            raise ValueError(f"unknown feature names: {sorted(unknown)}")


def synth_generate(config: SynthConfig) -> tuple[list[ChoiceInstance], TemporalGraph]:
    """Grow a network by softmax choices with known coefficients.

    Authors 0..n-1 activate at times 0..n-1; one choice occurs per time step
    from t = n. At each step a uniformly drawn chooser receives a uniform
    candidate pool of ``candidate_pool_size`` eligible authors, and picks one
    with probability softmax(beta_true . x). The realized edge enters the
    graph so later features see it. Reproducible from the seed.
    """
    rng = np.random.default_rng(config.seed)
    beta = np.asarray(config.beta_true, dtype=np.float64)
    graph = TemporalGraph()
    for author in range(config.n_authors):
        graph.register_node(author, author)
    feature_idx = [
        (FEATURE_NAMES + (STATE_FEATURE,)).index(name) for name in config.feature_names
    ]
    instances: list[ChoiceInstance] = []
    t = config.n_authors
    attempts_left = 50 * config.n_choices + 100
    while len(instances) < config.n_choices:
        attempts_left -= 1
        if attempts_left < 0:
            raise RuntimeError("growth stalled: too few eligible candidates to keep choosing")
        graph.advance_to(t)
        chooser = int(rng.integers(config.n_authors))
        eligible = eligible_candidates(graph, None, chooser, t)
        if len(eligible) < 2:
            t += 1
            continue
        ordered = sorted(eligible)
        take = min(config.candidate_pool_size, len(ordered))
        pool_idx = rng.permutation(len(ordered))[:take]
        alternatives = [ordered[i] for i in pool_idx]
        full = np.vstack(
            [build_features(chooser, alt, t, graph, None, include_state=True) for alt in alternatives]
        )
        X = full[:, feature_idx]
        u = X @ beta
        u -= u.max()
        p = np.exp(u)
        p /= p.sum()
        chosen = int(rng.choice(take, p=p))
        instances.append(
            ChoiceInstance(
                chooser=chooser,
                time=t,
                alternatives=alternatives,
                chosen=chosen,
                X=X,
                feature_names=tuple(config.feature_names),
            )
        )
        graph.append_edge(chooser, alternatives[chosen], t)
        t += 1
    return instances, graph


# -- serialization ---------------------------------------------------------------


def write_choice_sets(path, instances, meta: dict | None = None) -> None:
    """Write instances as JSON lines, optionally preceded by one meta line."""
    with open(path, "w") as fh:
        if meta is not None:
            fh.write(json.dumps({"meta": meta}, sort_keys=True) + "\n")
        for inst in instances:
            fh.write(
                json.dumps(
                    {
                        "chooser": _plain(inst.chooser),
                        "time": inst.time,
                        "alternatives": [_plain(a) for a in inst.alternatives],
                        "chosen": inst.chosen,
                        "X": [[float(v) for v in row] for row in inst.X],
                        "feature_names": list(inst.feature_names),
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def read_choice_sets(path) -> tuple[list[ChoiceInstance], dict | None]:
    """Read a JSON-lines choice-set file; returns (instances, meta-or-None)."""
    instances: list[ChoiceInstance] = []
    meta = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "meta" in obj and "chooser" not in obj:
                meta = obj["meta"]
                continue
            instances.append(
                ChoiceInstance(
                    chooser=obj["chooser"],
                    time=obj["time"],
                    alternatives=obj["alternatives"],
                    chosen=obj["chosen"],
                    X=np.asarray(obj["X"], dtype=np.float64),
                    feature_names=tuple(obj["feature_names"]),
                )
            )
    return instances, meta


def _plain(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value

"""Trainable linear readout over simulated network observables.

Features are snapshots of internal node voltages (optionally link
resistances) taken at a few sample times of an episode, with a trailing
bias column. Training is ridge-regularized least squares with the bias
left unregularized; classification takes the sign of the linear score.
The stock task drives every external node with one waveform per episode,
square or sawtooth at a random phase, and asks the readout to tell the
two apart from the network's internal response.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import SimulationConfig, simulate
from .network import Network
from .signals import Signal


class RankDeficientWarning(UserWarning):
    """Unregularized normal equations were singular; minimum-norm solution."""


@dataclass(frozen=True)
class FeatureMatrix:
    """Rectangular feature block, one row per episode, trailing bias column."""

    values: np.ndarray
    column_names: tuple

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "column_names", tuple(self.column_names))
        if v.ndim != 2:
            raise ValueError(f"feature matrix must be 2-D, got shape {v.shape}")
        if len(self.column_names) != v.shape[1]:
            raise ValueError(
                f"{len(self.column_names)} column names for {v.shape[1]} columns"
            )
        if not self.column_names or self.column_names[-1] != "bias":
            raise ValueError("last column must be the bias column")
        if not np.all(np.isfinite(v)):
            raise ValueError("feature matrix contains non-finite entries")

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def rows(self, indices) -> "FeatureMatrix":
        return FeatureMatrix(self.values[np.asarray(indices)], self.column_names)

    def to_csv(self) -> str:
        header = ",".join(("row",) + self.column_names)
        rows = [header]
        for i, row in enumerate(self.values):
            rows.append(",".join([str(i)] + [format(v, ".16e") for v in row]))
        return "\n".join(rows) + "\n"


@dataclass(frozen=True)
class ReadoutWeights:
    weights: np.ndarray  # one per feature column, bias last
    rank_deficient: bool = False


def train_readout(features: FeatureMatrix, targets, ridge: float = 0.0) -> ReadoutWeights:
    """Solve min ||F w - y||^2 + ridge * ||w_non-bias||^2.

    ridge = 0 with singular normal equations falls back to the minimum-norm
    least-squares solution and warns (rank_deficient flag set).
    """
    if ridge < 0.0:
        raise ValueError(f"ridge must be >= 0, got {ridge}")
    f = features.values
    y = np.asarray(targets, dtype=float)
    if y.shape != (f.shape[0],):
        raise ValueError(f"targets shape {y.shape} does not match {f.shape[0]} rows")

    penalty = np.ones(f.shape[1])
    penalty[-1] = 0.0  # bias unregularized
    gram = f.T @ f + ridge * np.diag(penalty)
    rhs = f.T @ y

    cond = np.linalg.cond(gram) if gram.size else np.inf
    if np.isfinite(cond) and cond <= 1e12:
        return ReadoutWeights(np.linalg.solve(gram, rhs), rank_deficient=False)

    if ridge == 0.0:
        warnings.warn(
            "normal equations are singular; returning the minimum-norm fit",
            RankDeficientWarning,
            stacklevel=2,
        )
        solution = np.linalg.lstsq(f, y, rcond=None)[0]
    else:
        # augment with the square-root penalty rows and use min-norm there
        aug = np.vstack([f, np.sqrt(ridge) * np.diag(np.sqrt(penalty))])
        aug_y = np.concatenate([y, np.zeros(f.shape[1])])
        solution = np.linalg.lstsq(aug, aug_y, rcond=None)[0]
    return ReadoutWeights(solution, rank_deficient=True)


def scores(weights: ReadoutWeights, features: FeatureMatrix) -> np.ndarray:
    return features.values @ weights.weights


def classify(weights: ReadoutWeights, features: FeatureMatrix) -> np.ndarray:
    """Predicted labels in {-1, +1}; a score of exactly 0 maps to +1."""
    s = scores(weights, features)
    return np.where(s >= 0.0, 1, -1)


# --- stock waveform discrimination task --------------------------------------

LABEL_SQUARE = 1
LABEL_SAWTOOTH = -1


@dataclass(frozen=True)
class WaveformTaskConfig:
    """Protocol of the square-vs-sawtooth episodes.

    Each episode drives all external nodes with the same waveform (square
    for label +1, sawtooth for -1) at a uniformly random phase, simulates
    episode_duration seconds from the rested initial state, and samples the
    internal node voltages (plus link resistances when requested) at
    samples_per_episode evenly spaced times.
    """

    n_episodes: int = 100
    drive_amplitude: float = 1.0
    drive_frequency: float = 1.0
    episode_duration: float = 2.0
    dt: float = 0.006
    samples_per_episode: int = 8
    train_fraction: float = 0.8
    ridge: float = 1e-6
    seed: int = 0
    include_resistances: bool = False
    shuffle_labels: bool = False

    def __post_init__(self):
        if self.n_episodes < 2:
            raise ValueError("need at least 2 episodes")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must be in (0, 1)")
        if self.samples_per_episode < 1:
            raise ValueError("samples_per_episode must be >= 1")


@dataclass(frozen=True)
class WaveformTaskResult:
    config: WaveformTaskConfig
    labels: np.ndarray  # labels actually trained against
    phases: np.ndarray
    subsets: tuple  # "train" / "test" per episode
    scores: np.ndarray
    predictions: np.ndarray
    accuracy: float  # held-out
    train_accuracy: float
    n_train: int
    n_test: int
    features: FeatureMatrix
    weights: ReadoutWeights


def _episode_signal(label: int, phase: float, config: WaveformTaskConfig) -> Signal:
    make = Signal.square if label == LABEL_SQUARE else Signal.sawtooth
    return make(config.drive_amplitude, config.drive_frequency, phase)


def _episode_row(network, signal, sample_idx, include_resistances, sim_config):
    drives = {nid: signal for nid in network.external_nodes}
    trace = simulate(network, drives, sim_config)
    internal_cols = [trace.node_ids.index(nid) for nid in network.internal_nodes]
    parts = []
    for idx in sample_idx:
        parts.append(trace.node_voltages[idx, internal_cols])
        if include_resistances:
            parts.append(trace.resistances[idx])
    return np.concatenate(parts)


def waveform_task(network: Network, config: WaveformTaskConfig, jobs: int = 1) -> WaveformTaskResult:
    """Run the full task: episodes, features, split, training, evaluation.

    Deterministic for a fixed seed: label assignment, phases, the optional
    label shuffle, and the train/test split all come from one seeded
    generator, in that order, independent of jobs.
    """
    rng = np.random.default_rng(config.seed)
    n = config.n_episodes
    labels = np.array([LABEL_SQUARE] * ((n + 1) // 2) + [LABEL_SAWTOOTH] * (n // 2))
    labels = rng.permutation(labels)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=n)

    n_steps = max(1, round(config.episode_duration / config.dt))
    sim_config = SimulationConfig(dt=config.dt, n_steps=n_steps)
    # evenly spaced sample times, last one at the episode end
    sample_idx = [
        round((j + 1) * n_steps / config.samples_per_episode)
        for j in range(config.samples_per_episode)
    ]

    signals = [_episode_signal(labels[i], phases[i], config) for i in range(n)]
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(
                pool.map(
                    lambda s: _episode_row(
                        network, s, sample_idx, config.include_resistances, sim_config
                    ),
                    signals,
                )
            )
    else:
        rows = [
            _episode_row(network, s, sample_idx, config.include_resistances, sim_config)
            for s in signals
        ]

    names = []
    for j in range(config.samples_per_episode):
        names += [f"V{nid}_s{j}" for nid in network.internal_nodes]
        if config.include_resistances:
            names += [f"R{k}_s{j}" for k in range(1, len(network.links) + 1)]
    names.append("bias")
    values = np.column_stack([np.array(rows), np.ones(n)])
    features = FeatureMatrix(values, tuple(names))

    if config.shuffle_labels:
        labels = rng.permutation(labels)

    order = rng.permutation(n)
    n_train = int(round(config.train_fraction * n))
    n_test = n - n_train
    train_idx = order[:n_train]
    test_idx = order[n_train:]
    for name, idx in (("train", train_idx), ("test", test_idx)):
        if len(idx) == 0 or len(set(labels[idx])) < 2:
            raise ValueError(
                f"{name} split does not contain both classes with "
                f"n_episodes={n} and train_fraction={config.train_fraction}; "
                f"increase the episode count"
            )

    weights = train_readout(features.rows(train_idx), labels[train_idx], config.ridge)
    all_scores = scores(weights, features)
    predictions = np.where(all_scores >= 0.0, 1, -1)
    subsets = np.empty(n, dtype=object)
    subsets[train_idx] = "train"
    subsets[test_idx] = "test"

    test_acc = float(np.mean(predictions[test_idx] == labels[test_idx]))
    train_acc = float(np.mean(predictions[train_idx] == labels[train_idx]))
    return WaveformTaskResult(
        config=config,
        labels=labels,
        phases=phases,
        subsets=tuple(subsets),
        scores=all_scores,
        predictions=predictions,
        accuracy=test_acc,
        train_accuracy=train_acc,
        n_train=n_train,
        n_test=n_test,
        features=features,
        weights=weights,
    )


def task_to_document(result: WaveformTaskResult) -> dict:
    """JSON-ready report of a task run."""
    cfg = result.config
    return {
        "task": "square-vs-sawtooth",
        "label_convention": {"1": "square", "-1": "sawtooth"},
        "seed": cfg.seed,
        "n_episodes": cfg.n_episodes,
        "n_train": result.n_train,
        "n_test": result.n_test,
        "ridge": cfg.ridge,
        "drive_frequency": cfg.drive_frequency,
        "drive_amplitude": cfg.drive_amplitude,
        "episode_duration": cfg.episode_duration,
        "dt": cfg.dt,
        "samples_per_episode": cfg.samples_per_episode,
        "include_resistances": cfg.include_resistances,
        "shuffle_labels": cfg.shuffle_labels,
        "accuracy": result.accuracy,
        "train_accuracy": result.train_accuracy,
        "rank_deficient": result.weights.rank_deficient,
        "episodes": [
            {
                "episode": i,
                "label": int(result.labels[i]),
                "phase": float(result.phases[i]),
                "subset": result.subsets[i],
                "score": float(result.scores[i]),
                "predicted": int(result.predictions[i]),
            }
            for i in range(cfg.n_episodes)
        ],
    }

"""Dataset ingestion: LIBSVM-format text files and synthetic generation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import Dataset, normalize_rows

__all__ = ["SyntheticSpec", "generate_synthetic", "load_libsvm", "save_libsvm"]


@dataclass(frozen=True)
class SyntheticSpec:
    """Planted binary-classification task.

    Gaussian features are drawn row-wise, labels come from a planted linear
    separator and are flipped independently with probability
    ``label_noise``; rows are normalized to unit norm afterwards.
    """

    n: int
    p: int
    label_noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("n and p must be positive")
        if not 0.0 <= self.label_noise < 1.0:
            raise ValueError("label noise rate must lie in [0, 1)")


def generate_synthetic(spec: SyntheticSpec, seed: int | None = None) -> Dataset:
    """Deterministic synthetic dataset; ``seed`` overrides ``spec.seed``."""
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    feats = rng.standard_normal((spec.n, spec.p))
    separator = rng.standard_normal(spec.p)
    margins = feats @ separator
    labels = np.where(margins >= 0.0, 1.0, -1.0)
    if spec.label_noise > 0.0:
        flips = rng.random(spec.n) < spec.label_noise
        labels = np.where(flips, -labels, labels)
    return Dataset(features=normalize_rows(feats), labels=labels, normalized=True)


def load_libsvm(
    path,
    n_features: int | None = None,
    label_map: dict[float, float] | None = None,
    normalize: bool = False,
    require_binary: bool = False,
) -> Dataset:
    """Parse a dense dataset from LIBSVM text ("<label> <idx>:<val> ...").

    Indices are 1-based and must be strictly ascending within a line.
    ``label_map`` remaps raw labels (e.g. {0: -1, 1: 1}); with
    ``require_binary`` the final labels must lie in {-1, +1}.
    """
    rows: list[dict[int, float]] = []
    labels: list[float] = []
    max_idx = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                label = float(parts[0])
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed label {parts[0]!r}") from None
            if label_map is not None:
                label = label_map.get(label, label)
            entries: dict[int, float] = {}
            prev_idx = 0
            for tok in parts[1:]:
                try:
                    idx_s, val_s = tok.split(":")
                    idx, val = int(idx_s), float(val_s)
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: malformed entry {tok!r}") from None
                if idx < 1:
                    raise ValueError(f"{path}:{lineno}: index {idx} must be >= 1")
                if idx in entries:
                    raise ValueError(f"{path}:{lineno}: duplicate index {idx}")
                if idx <= prev_idx:
                    raise ValueError(f"{path}:{lineno}: indices must be ascending")
                prev_idx = idx
                entries[idx] = val
                max_idx = max(max_idx, idx)
            rows.append(entries)
            labels.append(label)
    if not rows:
        raise ValueError(f"{path}: no data lines")
    p = n_features if n_features is not None else max_idx
    if max_idx > p:
        raise ValueError(f"{path}: feature index {max_idx} exceeds n_features={p}")
    feats = np.zeros((len(rows), p))
    for r, entries in enumerate(rows):
        for idx, val in entries.items():
            feats[r, idx - 1] = val
    label_arr = np.asarray(labels)
    if require_binary and not np.all(np.isin(label_arr, (-1.0, 1.0))):
        bad = label_arr[~np.isin(label_arr, (-1.0, 1.0))][0]
        raise ValueError(f"{path}: non-binary label {bad} (logistic loss needs labels in {{-1,+1}})")
    if normalize:
        feats = normalize_rows(feats)
    return Dataset(features=feats, labels=label_arr, normalized=normalize)


def save_libsvm(dataset: Dataset, path) -> None:
    """Write a dataset as LIBSVM text (deterministic round-trip formatting)."""
    with open(path, "w", newline="\n") as fh:
        for row, label in zip(dataset.features, dataset.labels):
            toks = [repr(float(label))]
            for j, val in enumerate(row, start=1):
                if val != 0.0:
                    toks.append(f"{j}:{repr(float(val))}")
            fh.write(" ".join(toks) + "\n")

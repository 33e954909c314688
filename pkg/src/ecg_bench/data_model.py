"""Domain types and persistence for ECG records, manifests, and feature tensors.

All types are treated as immutable after construction. File formats:

* record CSV   -- header line ``# id=<str> fs_hz=<float> label=<0|1|2>``
                  followed by one row of 12 comma-separated floats per sample
* manifest     -- JSON ``{"entries": [{"path": ..., "label": ...}, ...]}``
                  with paths relative to the manifest file
* tensor cache -- ``<base>.bin`` little-endian float64, row-major (S, T, C),
                  plus sidecar ``<base>.json`` with shape/labels/config hash
"""
import json
import math
import os
import re
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from .util import format_float, make_rng

N_LEADS = 12
LEAD_NAMES = ("I", "II", "III", "aVR", "aVL", "aVF",
              "V1", "V2", "V3", "V4", "V5", "V6")


class DataError(ValueError):
    """Malformed or inconsistent on-disk data."""


class ClassLabel(IntEnum):
    HEALTHY = 0
    LBBB = 1
    SLBBB = 2

    @property
    def display_name(self) -> str:
        return _CLASS_NAMES[self.value]


_CLASS_NAMES = ("Healthy", "LBBB", "SLBBB")
N_CLASSES = 3

_SPLIT_STREAM = 101  # domain tag so split and shuffle streams never collide

_ID_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")
_HEADER_RE = re.compile(r"^# id=(\S+) fs_hz=(\S+) label=([0-9]+)$")


@dataclass
class EcgRecord:
    """One subject's 12-lead time series (rows = time, columns = leads)."""
    id: str
    sampling_rate_hz: float
    samples: np.ndarray
    label: ClassLabel

    def __post_init__(self):
        self.samples = np.ascontiguousarray(self.samples, dtype=np.float64)
        if not _ID_RE.match(self.id):
            raise DataError(f"record id {self.id!r} contains illegal characters")
        if not (self.sampling_rate_hz > 0):
            raise DataError(f"record {self.id}: sampling rate must be positive")
        if self.samples.ndim != 2 or self.samples.shape[1] != N_LEADS:
            raise DataError(
                f"record {self.id}: expected Nx{N_LEADS} samples, got {self.samples.shape}")
        if self.samples.shape[0] < 2:
            raise DataError(f"record {self.id}: need at least 2 sample rows")
        if not np.all(np.isfinite(self.samples)):
            raise DataError(f"record {self.id}: non-finite sample value")
        self.label = ClassLabel(self.label)


@dataclass
class DatasetManifest:
    """Ordered list of (record path, label) pairs; paths are unique."""
    entries: list  # of (path: str, label: ClassLabel)
    base_dir: str = "."

    def __post_init__(self):
        self.entries = [(p, ClassLabel(l)) for p, l in self.entries]
        paths = [p for p, _ in self.entries]
        if len(set(paths)) != len(paths):
            raise DataError("manifest contains duplicate record paths")

    @property
    def class_counts(self):
        """Per-class tally recomputed from the entries."""
        counts = [0] * N_CLASSES
        for _, label in self.entries:
            counts[label] += 1
        return counts

    def record_paths(self):
        return [os.path.join(self.base_dir, p) for p, _ in self.entries]

    def labels(self) -> np.ndarray:
        return np.array([int(l) for _, l in self.entries], dtype=np.int64)


@dataclass
class FeatureTensor:
    """Preprocessed dataset: data (S, T, C) float64 plus per-sample labels."""
    data: np.ndarray
    labels: np.ndarray
    config_hash: str = ""

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.data.ndim != 3:
            raise DataError(f"feature tensor must be 3-d, got shape {self.data.shape}")
        s, t, c = self.data.shape
        if t < 1 or c < 1:
            raise DataError("feature tensor needs T >= 1 and C >= 1")
        if self.labels.shape != (s,):
            raise DataError(
                f"labels length {self.labels.shape} does not match {s} samples")
        if not np.all(np.isfinite(self.data)):
            raise DataError("feature tensor contains non-finite values")

    @property
    def shape(self):
        return self.data.shape


@dataclass
class SplitSet:
    """Disjoint train/val/test indices covering 0..S-1."""
    train: np.ndarray
    val: np.ndarray
    test: np.ndarray
    seed: int
    ratios: tuple = (0.7, 0.15, 0.15)

    def __post_init__(self):
        self.train = np.asarray(self.train, dtype=np.int64)
        self.val = np.asarray(self.val, dtype=np.int64)
        self.test = np.asarray(self.test, dtype=np.int64)

    def as_dict(self):
        return {"train": self.train, "val": self.val, "test": self.test}


# ---------------------------------------------------------------------------
# record CSV

def save_record(record: EcgRecord, path: str) -> None:
    lines = [f"# id={record.id} fs_hz={format_float(record.sampling_rate_hz)} "
             f"label={int(record.label)}"]
    for row in record.samples:
        lines.append(",".join(format_float(v) for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def load_record(path: str) -> EcgRecord:
    with open(path, "r") as fh:
        header = fh.readline().rstrip("\n")
        m = _HEADER_RE.match(header)
        if not m:
            raise DataError(f"{path}: malformed header line {header!r}")
        rec_id, fs_str, label_str = m.groups()
        label = int(label_str)
        if label not in (0, 1, 2):
            raise DataError(f"{path}: label {label} outside 0..2")
        try:
            fs = float(fs_str)
        except ValueError:
            raise DataError(f"{path}: unparseable sampling rate {fs_str!r}") from None
        rows = []
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != N_LEADS:
                raise DataError(
                    f"{path}:{line_no}: wrong column count {len(parts)} (expected {N_LEADS})")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise DataError(f"{path}:{line_no}: unparseable value") from None
    samples = np.array(rows, dtype=np.float64)
    if samples.size and not np.all(np.isfinite(samples)):
        raise DataError(f"{path}: non-finite sample value")
    try:
        return EcgRecord(rec_id, fs, samples, ClassLabel(label))
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# manifest JSON

def save_manifest(manifest: DatasetManifest, path: str) -> None:
    payload = {"entries": [{"path": p, "label": int(l)} for p, l in manifest.entries]}
    with open(path, "w", newline="\n") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_manifest(path: str) -> DatasetManifest:
    try:
        with open(path, "r") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: malformed manifest JSON ({exc})") from None
    if not isinstance(payload, dict) or "entries" not in payload:
        raise DataError(f"{path}: manifest missing 'entries'")
    base_dir = os.path.dirname(os.path.abspath(path))
    entries = []
    for ent in payload["entries"]:
        try:
            rec_path, label = ent["path"], int(ent["label"])
        except (KeyError, TypeError, ValueError):
            raise DataError(f"{path}: malformed manifest entry {ent!r}") from None
        if label not in (0, 1, 2):
            raise DataError(f"{path}: entry label {label} outside 0..2")
        if not os.path.exists(os.path.join(base_dir, rec_path)):
            raise DataError(f"{path}: dangling record path {rec_path!r}")
        entries.append((rec_path, ClassLabel(label)))
    return DatasetManifest(entries, base_dir=base_dir)


# ---------------------------------------------------------------------------
# tensor cache

def save_feature_tensor(tensor: FeatureTensor, base_path: str) -> None:
    """Write ``<base_path>.bin`` and ``<base_path>.json``."""
    data = np.ascontiguousarray(tensor.data, dtype="<f8")
    with open(base_path + ".bin", "wb") as fh:
        fh.write(data.tobytes(order="C"))
    sidecar = {
        "shape": list(tensor.data.shape),
        "labels": [int(l) for l in tensor.labels],
        "config_hash": tensor.config_hash,
    }
    with open(base_path + ".json", "w", newline="\n") as fh:
        json.dump(sidecar, fh, indent=2)
        fh.write("\n")


def load_feature_tensor(base_path: str) -> FeatureTensor:
    try:
        with open(base_path + ".json", "r") as fh:
            sidecar = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{base_path}.json: malformed sidecar ({exc})") from None
    shape = sidecar.get("shape")
    labels = sidecar.get("labels")
    if (not isinstance(shape, list) or len(shape) != 3
            or not all(isinstance(d, int) and d >= 0 for d in shape)):
        raise DataError(f"{base_path}.json: bad shape {shape!r}")
    raw = np.fromfile(base_path + ".bin", dtype="<f8")
    expected = shape[0] * shape[1] * shape[2]
    if raw.size != expected:
        raise DataError(
            f"{base_path}.bin holds {raw.size} values, sidecar declares {expected}")
    if not isinstance(labels, list) or len(labels) != shape[0]:
        raise DataError(
            f"{base_path}.json: {0 if labels is None else len(labels)} labels "
            f"for {shape[0]} samples")
    data = raw.astype(np.float64).reshape(shape)
    return FeatureTensor(data, np.array(labels, dtype=np.int64),
                         config_hash=sidecar.get("config_hash", ""))


# ---------------------------------------------------------------------------
# stratified splitting

def stratified_split(labels, ratios, seed: int) -> SplitSet:
    """Deterministic stratified shuffle-split on labels alone.

    Ratios may contain zeros (those splits stay empty); each class places at
    least one sample in every nonempty split, staying within +/-1 sample of
    ratio * class_count.
    """
    labels = np.asarray(labels, dtype=np.int64)
    ratios = tuple(float(r) for r in ratios)
    if len(ratios) != 3 or any(r < 0 for r in ratios):
        raise DataError(f"ratios must be 3 nonnegative reals, got {ratios}")
    if not math.isclose(sum(ratios), 1.0, abs_tol=1e-9):
        raise DataError(f"ratios must sum to 1, got {sum(ratios)!r}")
    nonempty = [i for i, r in enumerate(ratios) if r > 0]
    if not nonempty:
        raise DataError("all three ratios are zero")

    rng = make_rng(seed, _SPLIT_STREAM)
    buckets = [[], [], []]
    for cls in range(N_CLASSES):
        idx = np.flatnonzero(labels == cls)
        n_c = idx.size
        if n_c < 3:
            raise DataError(f"class {cls} has {n_c} samples; need at least 3")
        if n_c < len(nonempty):
            raise DataError(
                f"class {cls} has too few samples to place one in each nonempty split")
        idx = idx[rng.permutation(n_c)]
        counts = _largest_remainder(n_c, ratios, nonempty)
        start = 0
        for split_i in range(3):
            buckets[split_i].append(idx[start:start + counts[split_i]])
            start += counts[split_i]
    train, val, test = (np.concatenate(b) if b else np.empty(0, np.int64)
                        for b in buckets)
    return SplitSet(train, val, test, seed=seed, ratios=ratios)


def _largest_remainder(n: int, ratios, nonempty) -> list:
    targets = [r * n for r in ratios]
    counts = [int(math.floor(t)) for t in targets]
    fracs = [t - c for t, c in zip(targets, counts)]
    for i in sorted(range(3), key=lambda i: (-fracs[i], i))[: n - sum(counts)]:
        counts[i] += 1
    # guarantee one sample per class in every nonempty split
    for i in nonempty:
        if counts[i] == 0:
            donor = max(range(3), key=lambda j: counts[j] - targets[j])
            counts[donor] -= 1
            counts[i] += 1
    return counts


def split_dataset(tensor: FeatureTensor, ratios, seed: int) -> SplitSet:
    """Stratified split of a feature tensor (depends only on its labels)."""
    return stratified_split(tensor.labels, ratios, seed)

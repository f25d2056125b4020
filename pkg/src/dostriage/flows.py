"""Flow records: canonical schema, CSV adapters and a synthetic two-domain generator."""

from __future__ import annotations

import csv
import enum
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import EmptyFile, InvalidSpec, MissingColumn, MixedDomain, UnknownLabel

log = logging.getLogger(__name__)

FEATURES = ("dur", "spkts", "dpkts", "load", "rate", "sinpkt", "dinpkt")
N_FEATURES = len(FEATURES)
CANONICAL_HEADER = FEATURES + ("label", "domain")


class Label(enum.IntEnum):
    NORMAL = 0
    DOS = 1

    def __str__(self):
        return "DoS" if self is Label.DOS else "Normal"

    @classmethod
    def parse(cls, text: str) -> "Label":
        if text == "DoS":
            return cls.DOS
        if text == "Normal":
            return cls.NORMAL
        raise UnknownLabel(text, "canonical")


class Schema(enum.Enum):
    CANONICAL = "canonical"
    UNSW_NB15 = "unsw"
    CICIDS2017 = "cicids"


class FlowRecord(NamedTuple):
    dur: float
    spkts: float
    dpkts: float
    load: float
    rate: float
    sinpkt: float
    dinpkt: float
    label: Label
    domain: str
    seq: int


@dataclass(frozen=True, eq=False)
class Dataset:
    """Ordered flow observations from a single domain.

    ``features`` is an ``(n, 7)`` float array in canonical column order,
    ``labels`` holds 1 for DoS and 0 for Normal, and ``seq`` is the ordinal
    position of each row in the file it came from.
    """

    features: np.ndarray
    labels: np.ndarray
    domain: str
    seq: np.ndarray = None
    dropped: int = 0
    feature_names: tuple = field(default=FEATURES)

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64).reshape(-1, N_FEATURES)
        labels = np.asarray(self.labels, dtype=np.int8).reshape(-1)
        if labels.shape[0] != feats.shape[0]:
            raise ValueError("features and labels differ in length")
        seq = np.arange(feats.shape[0]) if self.seq is None else np.asarray(self.seq, dtype=np.int64)
        if seq.shape[0] and np.any(np.diff(seq) <= 0):
            raise ValueError("seq must be strictly increasing")
        for name, arr in (("features", feats), ("labels", labels), ("seq", seq)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if tuple(self.feature_names) != FEATURES:
            raise ValueError("feature_names must be the canonical 7-name list")

    def __len__(self):
        return self.features.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.domain == other.domain
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.seq, other.seq)
        )

    @property
    def n_dos(self) -> int:
        return int(self.labels.sum())

    def records(self) -> Iterator[FlowRecord]:
        for row, lab, s in zip(self.features, self.labels, self.seq):
            yield FlowRecord(*map(float, row), Label(int(lab)), self.domain, int(s))

    def take(self, idx) -> "Dataset":
        return Dataset(self.features[idx], self.labels[idx], self.domain, self.seq[idx])


def train_test_split(ds: Dataset, n_train: int = 80000) -> tuple[Dataset, Dataset]:
    """First ``n_train`` rows (by seq) for training, the rest for testing."""
    if len(ds) == 0:
        raise EmptyFile("cannot split an empty dataset")
    order = np.argsort(ds.seq, kind="stable")
    k = min(n_train, len(ds))
    return ds.take(order[:k]), ds.take(order[k:])


# --- CSV adapters -----------------------------------------------------------

# UNSW-NB15: DoS is its own class; the other eight attack categories are pooled
# into Normal.  The raw (header-less) release leaves attack_cat blank for
# benign traffic.
UNSW_LABELS = {
    "dos": Label.DOS,
    "normal": Label.NORMAL,
    "": Label.NORMAL,
    "fuzzers": Label.NORMAL,
    "analysis": Label.NORMAL,
    "backdoor": Label.NORMAL,
    "backdoors": Label.NORMAL,
    "exploits": Label.NORMAL,
    "generic": Label.NORMAL,
    "reconnaissance": Label.NORMAL,
    "shellcode": Label.NORMAL,
    "worms": Label.NORMAL,
}

# CICIDS2017: the Wednesday DoS family and the Friday DDoS/botnet traffic are
# DoS; every other attack is pooled into Normal like the UNSW categories.
CICIDS_LABELS = {
    "benign": Label.NORMAL,
    "dos slowloris": Label.DOS,
    "dos slowhttptest": Label.DOS,
    "dos hulk": Label.DOS,
    "dos goldeneye": Label.DOS,
    "ddos": Label.DOS,
    "bot": Label.DOS,
    "heartbleed": Label.NORMAL,
    "portscan": Label.NORMAL,
    "ftp-patator": Label.NORMAL,
    "ssh-patator": Label.NORMAL,
    "infiltration": Label.NORMAL,
    "web attack brute force": Label.NORMAL,
    "web attack xss": Label.NORMAL,
    "web attack sql injection": Label.NORMAL,
}

# native column -> (canonical feature, multiplicative unit factor).
# Durations and inter-arrival times are in microseconds, flow bytes/s is
# converted to bits/s to match UNSW's load columns.
CICIDS_COLUMNS = {
    "dur": ("flow duration", 1e-6),
    "spkts": ("total fwd packets", 1.0),
    "dpkts": ("total backward packets", 1.0),
    "load": ("flow bytes/s", 8.0),
    "rate": ("flow packets/s", 1.0),
    "sinpkt": ("fwd iat mean", 1e-3),
    "dinpkt": ("bwd iat mean", 1e-3),
}

# UNSW names per canonical feature; load is sload + dload unless a load column exists.
UNSW_COLUMNS = {
    "dur": ("dur",),
    "spkts": ("spkts",),
    "dpkts": ("dpkts",),
    "rate": ("rate",),
    "sinpkt": ("sinpkt", "sintpkt"),
    "dinpkt": ("dinpkt", "dintpkt"),
}


def _norm(name: str) -> str:
    return " ".join(name.strip().lower().replace("_", " ").split())


def _norm_label(text: str) -> str:
    # CICIDS web-attack labels ship with assorted dash characters.
    cleaned = "".join(ch if ch.isalnum() or ch.isspace() or ch == "-" else " " for ch in text)
    cleaned = cleaned.replace(" - ", " ")
    return " ".join(cleaned.strip().lower().split())


def _column_index(header: Sequence[str], *candidates: str) -> int:
    normed = [_norm(h) for h in header]
    for cand in candidates:
        if _norm(cand) in normed:
            return normed.index(_norm(cand))
    raise MissingColumn(candidates[0])


def _parse_value(text: str) -> float:
    v = float(text)
    if not math.isfinite(v) or v < 0:
        raise ValueError(text)
    return v


def _row_extractor(header, schema):
    """Build ``row -> (features, label_text)`` for a schema; raises MissingColumn."""
    if schema is Schema.CANONICAL:
        idx = [_column_index(header, name) for name in FEATURES]
        lab = _column_index(header, "label")

        def extract(row):
            return [_parse_value(row[i]) for i in idx], row[lab]

        return extract, _column_index(header, "domain")

    if schema is Schema.UNSW_NB15:
        idx = {k: _column_index(header, *names) for k, names in UNSW_COLUMNS.items()}
        try:
            load_idx = (_column_index(header, "load"),)
        except MissingColumn:
            load_idx = (_column_index(header, "sload"), _column_index(header, "dload"))
        lab = _column_index(header, "attack_cat")

        def extract(row):
            vals = {k: _parse_value(row[i]) for k, i in idx.items()}
            vals["load"] = sum(_parse_value(row[i]) for i in load_idx)
            return [vals[name] for name in FEATURES], row[lab]

        return extract, None

    idx = {k: (_column_index(header, col), f) for k, (col, f) in CICIDS_COLUMNS.items()}
    lab = _column_index(header, "label")

    def extract(row):
        return [_parse_value(row[idx[name][0]]) * idx[name][1] for name in FEATURES], row[lab]

    return extract, None


def _label_lookup(schema: Schema, text: str) -> Label:
    if schema is Schema.CANONICAL:
        return Label.parse(text.strip())
    table = UNSW_LABELS if schema is Schema.UNSW_NB15 else CICIDS_LABELS
    key = _norm_label(text)
    if key not in table:
        raise UnknownLabel(text, schema.value)
    return table[key]


def ingest_csv(path, schema: Schema | str = Schema.CANONICAL, domain: str | None = None) -> Dataset:
    """Parse a flow CSV into a canonical :class:`Dataset`.

    Rows whose required fields are missing, unparseable, negative or
    non-finite are dropped; the count is kept on ``Dataset.dropped``.  An
    unrecognised label string is an error rather than a dropped row.
    """
    schema = Schema(schema)
    path = Path(path)
    feats: list[list[float]] = []
    labels: list[int] = []
    seq: list[int] = []
    dropped = 0
    file_domain = None
    with path.open(newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise EmptyFile(f"{path}: no header row")
        extract, domain_idx = _row_extractor(header, schema)
        for i, row in enumerate(reader):
            if not row:
                continue
            try:
                values, label_text = extract(row)
            except (ValueError, IndexError):
                dropped += 1
                continue
            label = _label_lookup(schema, label_text)
            if domain_idx is not None:
                tag = row[domain_idx]
                if file_domain is None:
                    file_domain = tag
                elif tag != file_domain and domain is None:
                    raise MixedDomain(f"{path}: rows carry domains {file_domain!r} and {tag!r}")
            feats.append(values)
            labels.append(int(label))
            seq.append(i)
    if not feats and not dropped:
        raise EmptyFile(f"{path}: no data rows")
    if dropped:
        log.info("%s: dropped %d unparseable rows", path, dropped)
    tag = domain or file_domain or schema.value
    return Dataset(np.array(feats, dtype=np.float64).reshape(-1, N_FEATURES), labels, tag, seq, dropped)


def write_canonical(ds: Dataset, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CANONICAL_HEADER)
        for row, lab in zip(ds.features, ds.labels):
            writer.writerow([format(v, ".9g") for v in row] + [str(Label(int(lab))), ds.domain])


# --- synthetic domains ------------------------------------------------------

# Typical Normal-traffic magnitudes (log scale) in canonical units.
_LOG_CENTER = np.log(np.array([0.5, 12.0, 10.0, 2.0e5, 40.0, 25.0, 20.0]))
_NORMAL_SIGMA = np.array([0.55, 0.5, 0.5, 0.6, 0.55, 0.5, 0.5])
# DoS traffic is a tighter cluster than the heterogeneous benign traffic.
_DOS_SPREAD = 0.35
# Unit direction of the DoS displacement in log-feature space: short flows,
# many source packets, few replies, high load/rate, short source gaps.
_DOS_DIRECTION = np.array([-0.35, 0.45, -0.3, 0.4, 0.45, -0.4, 0.25])
_DOS_DIRECTION = _DOS_DIRECTION / np.linalg.norm(_DOS_DIRECTION)
# Shared correlation between features (packets, bytes and rates co-vary).
_CORR = np.array(
    [
        [1.0, 0.3, 0.3, -0.2, -0.3, 0.2, 0.2],
        [0.3, 1.0, 0.6, 0.4, 0.3, -0.1, -0.1],
        [0.3, 0.6, 1.0, 0.3, 0.2, -0.1, -0.1],
        [-0.2, 0.4, 0.3, 1.0, 0.6, -0.3, -0.2],
        [-0.3, 0.3, 0.2, 0.6, 1.0, -0.4, -0.3],
        [0.2, -0.1, -0.1, -0.3, -0.4, 1.0, 0.4],
        [0.2, -0.1, -0.1, -0.2, -0.3, 0.4, 1.0],
    ]
)
_CHOL = np.linalg.cholesky(_CORR)


@dataclass(frozen=True)
class SynthSpec:
    n_records: int
    dos_fraction: float = 0.05
    scale: tuple = (1.0,) * N_FEATURES
    offset: tuple = (0.0,) * N_FEATURES
    class_separation: float = 2.0
    rng_seed: int = 0
    domain: str = "synth"
    # per-feature multiplier on the DoS displacement; -1 flips a feature's
    # direction (e.g. low-and-slow DoS where volumetric DoS has high load)
    dos_profile: tuple = (1.0,) * N_FEATURES

    def validate(self) -> None:
        if int(self.n_records) < 1:
            raise InvalidSpec("n_records must be positive")
        if not 0.0 < self.dos_fraction < 1.0:
            raise InvalidSpec("dos_fraction must lie in (0, 1)")
        scale = np.asarray(self.scale, dtype=float)
        offset = np.asarray(self.offset, dtype=float)
        if scale.shape != (N_FEATURES,) or offset.shape != (N_FEATURES,):
            raise InvalidSpec("scale and offset need one entry per feature")
        if not np.all(np.isfinite(scale)) or np.any(scale <= 0):
            raise InvalidSpec("scale entries must be strictly positive")
        if not np.all(np.isfinite(offset)):
            raise InvalidSpec("offset entries must be finite")
        profile = np.asarray(self.dos_profile, dtype=float)
        if profile.shape != (N_FEATURES,) or not np.all(np.isfinite(profile)):
            raise InvalidSpec("dos_profile needs one finite entry per feature")
        if not (math.isfinite(self.class_separation) and self.class_separation >= 0):
            raise InvalidSpec("class_separation must be >= 0")


def synth_generate(spec: SynthSpec) -> Dataset:
    """Draw a labelled synthetic domain.

    Features are lognormal; DoS rows are displaced from Normal by
    ``class_separation`` (in log units) along a fixed direction and drawn
    with a smaller spread.  The domain shift ``scale * x + offset`` is
    applied to every row and the result clipped at zero.
    """
    spec.validate()
    n = int(spec.n_records)
    rng = np.random.default_rng(spec.rng_seed)
    n_dos = int(round(n * spec.dos_fraction))
    labels = np.zeros(n, dtype=np.int8)
    labels[rng.permutation(n)[:n_dos]] = 1
    noise = rng.standard_normal((n, N_FEATURES)) @ _CHOL.T
    spread = np.where(labels[:, None] == 1, _DOS_SPREAD, 1.0) * _NORMAL_SIGMA
    logx = _LOG_CENTER + noise * spread
    logx += labels[:, None] * spec.class_separation * (_DOS_DIRECTION * np.asarray(spec.dos_profile))
    x = np.asarray(spec.scale) * np.exp(logx) + np.asarray(spec.offset)
    return Dataset(np.maximum(x, 0.0), labels, spec.domain)

"""Trial data model, binary epoch container, epoching, synthetic data.

The on-disk format is the MIEC container: a fixed 20-byte header
followed by one record per trial.  All integers are little-endian, all
samples are little-endian 32-bit floats in channel-major order.  A JSON
sidecar next to the container carries channel names and the cue window.
See docs/FORMATS.md for the byte-level layout.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._rng import PURPOSE_SYNTH, numpy_rng
from .filters import DEFAULT_BANDS, FilterBank

MAGIC = b"MIEC1"
CONTAINER_VERSION = 1
_HEADER = struct.Struct("<5sBIHII")   # magic, version, trials, channels, samples, rate_mhz
_TRIAL_PREFIX = struct.Struct("<HBB")  # subject, session, label

VALID_LABELS = (1, 2, 3, 4)

#: 10-20 montage names for the standard 22-electrode motor-imagery cap.
DEFAULT_CHANNEL_NAMES = [
    "Fz", "FC3", "FC1", "FCz", "FC2", "FC4", "C5", "C3", "C1", "Cz", "C2",
    "C4", "C6", "CP3", "CP1", "CPz", "CP2", "CP4", "P1", "Pz", "P2", "POz",
]


class ContainerFormatError(ValueError):
    """Raised when a byte stream is not a well-formed MIEC container."""


@dataclass
class Trial:
    """One labelled epoch: channels x samples, microvolt scale.

    label is 1-based (one of 1..4), subject 1-based, session 1 or 2.
    """

    data: np.ndarray
    label: int
    subject: int
    session: int = 1

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 2:
            raise ValueError(f"trial data must be 2-D, got shape {self.data.shape}")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("trial data contains non-finite values")
        if self.label not in VALID_LABELS:
            raise ValueError(f"label must be one of {VALID_LABELS}, got {self.label}")

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]


@dataclass
class TrialSet:
    """Ordered collection of same-shape trials plus recording metadata."""

    trials: list[Trial]
    sample_rate: float = 250.0
    channel_names: list[str] = field(default_factory=lambda: list(DEFAULT_CHANNEL_NAMES))
    cue_window: tuple[float, float] = (0.0, 4.0)

    def __post_init__(self):
        if self.trials:
            shape = self.trials[0].data.shape
            for i, t in enumerate(self.trials):
                if t.data.shape != shape:
                    raise ValueError(
                        f"trial {i} has shape {t.data.shape}, expected {shape}"
                    )

    def __len__(self) -> int:
        return len(self.trials)

    @property
    def n_channels(self) -> int:
        if self.trials:
            return self.trials[0].n_channels
        return len(self.channel_names)

    @property
    def n_samples(self) -> int:
        return self.trials[0].n_samples if self.trials else 0

    def labels(self) -> np.ndarray:
        return np.array([t.label for t in self.trials], dtype=np.int64)

    def subjects(self) -> list[int]:
        return sorted({t.subject for t in self.trials})

    def class_counts(self) -> dict[tuple[int, int], dict[int, int]]:
        """Trial counts per (subject, session), keyed by class label."""
        counts: dict[tuple[int, int], dict[int, int]] = {}
        for t in self.trials:
            per = counts.setdefault((t.subject, t.session), {c: 0 for c in VALID_LABELS})
            per[t.label] += 1
        return counts

    def subset(self, indices) -> "TrialSet":
        return TrialSet(
            trials=[self.trials[i] for i in indices],
            sample_rate=self.sample_rate,
            channel_names=list(self.channel_names),
            cue_window=self.cue_window,
        )

    def data_array(self) -> np.ndarray:
        """Stack all trials into (n_trials, channels, samples) float64."""
        return np.stack([t.data for t in self.trials]).astype(np.float64)


def write_container(trial_set: TrialSet, destination) -> int:
    """Serialize a TrialSet into the MIEC binary layout.

    Parameters
    ----------
    trial_set : TrialSet
    destination : binary file object or path

    Returns
    -------
    int
        Number of bytes written.
    """
    if isinstance(destination, (str, Path)):
        with open(destination, "wb") as fh:
            return write_container(trial_set, fh)

    channels = trial_set.n_channels
    samples = trial_set.n_samples
    rate_mhz = int(round(trial_set.sample_rate * 1000))
    header = _HEADER.pack(
        MAGIC, CONTAINER_VERSION, len(trial_set.trials), channels, samples, rate_mhz
    )
    written = destination.write(header)
    for trial in trial_set.trials:
        if trial.data.shape != (channels, samples):
            raise ValueError(
                f"trial shape {trial.data.shape} does not match container "
                f"geometry ({channels}, {samples})"
            )
        written += destination.write(
            _TRIAL_PREFIX.pack(trial.subject, trial.session, trial.label)
        )
        written += destination.write(
            np.ascontiguousarray(trial.data, dtype="<f4").tobytes()
        )
    return written


def read_container(source) -> TrialSet:
    """Parse an MIEC byte stream back into a TrialSet.

    Any malformed stream raises ContainerFormatError; there are no
    partial silent reads.
    """
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            trial_set = read_container(fh)
        sidecar = sidecar_path(source)
        if sidecar.exists():
            _apply_sidecar(trial_set, json.loads(sidecar.read_text()))
        return trial_set
    if isinstance(source, (bytes, bytearray)):
        return read_container(io.BytesIO(source))

    raw = source.read(_HEADER.size)
    if len(raw) < _HEADER.size:
        raise ContainerFormatError(
            f"stream too short for header: got {len(raw)} of {_HEADER.size} bytes"
        )
    magic, version, n_trials, channels, samples, rate_mhz = _HEADER.unpack(raw)
    if magic != MAGIC:
        raise ContainerFormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != CONTAINER_VERSION:
        raise ContainerFormatError(f"unsupported container version {version}")

    record_bytes = _TRIAL_PREFIX.size + channels * samples * 4
    trials = []
    for i in range(n_trials):
        record = source.read(record_bytes)
        if len(record) < record_bytes:
            raise ContainerFormatError(
                f"truncated stream in trial {i}: got {len(record)} of "
                f"{record_bytes} bytes"
            )
        subject, session, label = _TRIAL_PREFIX.unpack_from(record)
        if label not in VALID_LABELS:
            raise ContainerFormatError(
                f"trial {i}: label {label} outside {VALID_LABELS}"
            )
        data = np.frombuffer(record, dtype="<f4", offset=_TRIAL_PREFIX.size)
        data = data.reshape(channels, samples).copy()
        if not np.all(np.isfinite(data)):
            raise ContainerFormatError(f"trial {i}: non-finite sample value")
        trials.append(Trial(data=data, label=label, subject=subject, session=session))

    trailing = source.read(1)
    if trailing:
        raise ContainerFormatError("trailing bytes after last declared trial")
    channel_names = [f"ch{i + 1}" for i in range(channels)]
    if channels == len(DEFAULT_CHANNEL_NAMES):
        channel_names = list(DEFAULT_CHANNEL_NAMES)
    return TrialSet(
        trials=trials,
        sample_rate=rate_mhz / 1000.0,
        channel_names=channel_names,
    )


def sidecar_path(container_path) -> Path:
    return Path(str(container_path) + ".json")


def write_sidecar(trial_set: TrialSet, container_path) -> Path:
    """Write the JSON sidecar carrying channel names and cue window."""
    path = sidecar_path(container_path)
    payload = {
        "schema": "mibci-sidecar/1",
        "channel_names": list(trial_set.channel_names),
        "cue_window_s": list(trial_set.cue_window),
        "sample_rate_hz": trial_set.sample_rate,
    }
    path.write_text(json.dumps(payload, indent=2) + "\n")
    return path


def _apply_sidecar(trial_set: TrialSet, payload: dict) -> None:
    names = payload.get("channel_names")
    if names:
        if len(names) != trial_set.n_channels:
            raise ContainerFormatError(
                f"sidecar lists {len(names)} channel names for "
                f"{trial_set.n_channels} channels"
            )
        trial_set.channel_names = list(names)
    window = payload.get("cue_window_s")
    if window:
        trial_set.cue_window = (float(window[0]), float(window[1]))


def save_trialset(trial_set: TrialSet, container_path) -> int:
    """Write container plus sidecar; returns container byte count."""
    n = write_container(trial_set, container_path)
    write_sidecar(trial_set, container_path)
    return n


def epoch_cue_window(
    continuous: np.ndarray,
    cue_onsets,
    window_s: float,
    sample_rate: float,
) -> list[np.ndarray]:
    """Cut fixed-length epochs out of a continuous multichannel record.

    Parameters
    ----------
    continuous : ndarray, shape (channels, total_samples)
    cue_onsets : sequence of int
        Sample index of each cue.
    window_s : float
        Epoch length in seconds, counted from the cue onset.
    sample_rate : float

    Returns
    -------
    list of ndarray
        One (channels, window_s * sample_rate) block per onset; values
        are copied, never resampled.
    """
    continuous = np.asarray(continuous)
    if continuous.ndim != 2:
        raise ValueError(f"continuous data must be 2-D, got {continuous.shape}")
    n_window = int(round(window_s * sample_rate))
    if n_window <= 0:
        raise ValueError(f"window of {window_s} s gives an empty epoch")
    total = continuous.shape[1]
    blocks = []
    for onset in cue_onsets:
        onset = int(onset)
        if onset < 0 or onset + n_window > total:
            raise ValueError(
                f"cue at sample {onset} needs {n_window} samples but the "
                f"recording holds {total}"
            )
        blocks.append(continuous[:, onset:onset + n_window].copy())
    return blocks


# Class identity in the synthetic generator: each class amplifies one
# filter-bank band on its own channel group, so band-wise spatial
# variance separates the classes by construction.
_SYNTH_CLASS_BANDS = {1: "mu", 2: "low_beta", 3: "mid_beta", 4: "high_beta"}


def synth_class_channels(label: int, n_channels: int) -> np.ndarray:
    """Channel indices carrying the variance bump for one class."""
    group = max(1, n_channels // 4)
    start = (label - 1) * group
    return np.arange(start, min(start + group, n_channels))


def synth_trialset(
    subjects: int = 9,
    trials_per_class: int = 72,
    seed: int = 0,
    sessions: int = 1,
    n_channels: int = 22,
    n_samples: int = 1000,
    sample_rate: float = 250.0,
    class_gain: float = 3.0,
) -> TrialSet:
    """Generate a deterministic, separable 4-class synthetic TrialSet.

    Every trial is broadband Gaussian noise; trials of class k
    additionally carry band-limited noise, scaled by ``class_gain``, on
    that class's channel group within its designated filter-bank band
    (see _SYNTH_CLASS_BANDS).  The class-to-band/channel structure is
    shared by all subjects, while per-subject channel gains and noise
    floors vary, so both subject-specific and cross-subject decoding
    are possible but not trivial.

    The expected within-band variance ratio between the amplified class
    and the others is roughly 1 + class_gain**2.
    """
    if subjects < 1 or trials_per_class < 1 or sessions < 1:
        raise ValueError("subjects, trials_per_class and sessions must be >= 1")

    bands = {b.name: b for b in DEFAULT_BANDS}
    bank = FilterBank(
        bands=[bands[_SYNTH_CLASS_BANDS[c]] for c in VALID_LABELS],
        order=5,
        sample_rate=sample_rate,
    )

    trials: list[Trial] = []
    for subject in range(1, subjects + 1):
        subj_rng = numpy_rng(seed, PURPOSE_SYNTH, subject)
        channel_gain = subj_rng.uniform(0.8, 1.2, size=(n_channels, 1))
        noise_floor = subj_rng.uniform(0.9, 1.1)
        for session in range(1, sessions + 1):
            for label in VALID_LABELS:
                rng = numpy_rng(seed, PURPOSE_SYNTH, subject, session, label)
                chans = synth_class_channels(label, n_channels)
                for _ in range(trials_per_class):
                    background = noise_floor * rng.standard_normal(
                        (n_channels, n_samples)
                    )
                    carrier = rng.standard_normal((len(chans), n_samples))
                    bump = bank.apply(carrier, label - 1)
                    data = background
                    data[chans, :] += class_gain * bump
                    data *= channel_gain
                    trials.append(
                        Trial(
                            data=data.astype(np.float32),
                            label=label,
                            subject=subject,
                            session=session,
                        )
                    )

    channel_names = (
        list(DEFAULT_CHANNEL_NAMES)
        if n_channels == len(DEFAULT_CHANNEL_NAMES)
        else [f"ch{i + 1}" for i in range(n_channels)]
    )
    return TrialSet(
        trials=trials,
        sample_rate=sample_rate,
        channel_names=channel_names,
        cue_window=(0.0, n_samples / sample_rate),
    )

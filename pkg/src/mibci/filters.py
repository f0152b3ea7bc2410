"""Band-pass filter design and zero-phase application.

The filter bank used throughout the feature pipeline is a set of
Butterworth band-passes designed per band (analog prototype, frequency
prewarping, bilinear transform) and stored as second-order sections so
stability can be checked section by section.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal


@dataclass(frozen=True)
class BandSpec:
    """One pass band of the filter bank, in Hz."""

    name: str
    low_hz: float
    high_hz: float

    def validate(self, sample_rate: float) -> None:
        if not 0.0 < self.low_hz < self.high_hz < sample_rate / 2.0:
            raise ValueError(
                f"band {self.name!r}: need 0 < low < high < Nyquist, got "
                f"({self.low_hz}, {self.high_hz}) at fs={sample_rate}"
            )


#: Default seven-band decomposition of the sensorimotor rhythms.
DEFAULT_BANDS = (
    BandSpec("theta", 4.0, 8.0),
    BandSpec("mu", 8.0, 12.0),
    BandSpec("low_beta", 12.0, 16.0),
    BandSpec("mid_beta", 16.0, 20.0),
    BandSpec("high_beta", 20.0, 24.0),
    BandSpec("beta", 24.0, 30.0),
    BandSpec("mu_beta", 8.0, 30.0),
)


@dataclass(frozen=True)
class IirFilter:
    """Designed IIR band-pass as a cascade of second-order sections.

    Attributes
    ----------
    sos : ndarray, shape (n_sections, 6)
        Rows of (b0, b1, b2, a0, a1, a2) with a0 == 1.
    order : int
        Design order of the underlying analog prototype.
    band : BandSpec
        Pass band the filter was designed for.
    sample_rate : float
        Sampling rate in Hz.
    """

    sos: np.ndarray
    order: int
    band: BandSpec
    sample_rate: float

    def pole_magnitudes(self) -> np.ndarray:
        """Magnitude of every pole, section by section."""
        mags = []
        for sec in self.sos:
            poles = np.roots(sec[3:])
            mags.extend(np.abs(poles))
        return np.asarray(mags)

    def magnitude(self, freqs_hz) -> np.ndarray:
        """|H(f)| of the cascade at the given frequencies in Hz."""
        _, h = signal.sosfreqz(
            self.sos, worN=2 * np.pi * np.atleast_1d(freqs_hz) / self.sample_rate
        )
        return np.abs(h)


def design_bandpass(band: BandSpec, order: int, sample_rate: float) -> IirFilter:
    """Design a digital Butterworth band-pass for one filter-bank band.

    Parameters
    ----------
    band : BandSpec
        Pass band; must satisfy 0 < low < high < Nyquist.
    order : int
        Prototype order (the band-pass has 2*order poles).
    sample_rate : float
        Sampling rate in Hz.

    Returns
    -------
    IirFilter
        Stable second-order-section cascade.
    """
    band.validate(sample_rate)
    if order < 1:
        raise ValueError(f"filter order must be >= 1, got {order}")
    sos = signal.butter(
        order, [band.low_hz, band.high_hz], btype="bandpass", fs=sample_rate,
        output="sos",
    )
    filt = IirFilter(sos=sos, order=order, band=band, sample_rate=sample_rate)
    mags = filt.pole_magnitudes()
    if np.any(mags >= 1.0):
        raise RuntimeError(
            f"unstable section in band {band.name!r}: max pole magnitude "
            f"{mags.max():.6f}"
        )
    return filt


def filtfilt(filt: IirFilter, data: np.ndarray) -> np.ndarray:
    """Apply a filter forward and backward (zero phase).

    Edges are handled by reflective (even) padding of three times the
    design order, so a pure in-band sinusoid comes back with
    squared-magnitude gain and no phase shift.

    Parameters
    ----------
    filt : IirFilter
    data : ndarray, shape (..., samples)
        Filtering runs along the last axis; needs more than three times
        the design order in samples.

    Returns
    -------
    ndarray
        Same shape as ``data``.
    """
    data = np.asarray(data, dtype=np.float64)
    padlen = 3 * filt.order
    if data.shape[-1] <= padlen:
        raise ValueError(
            f"need more than {padlen} samples along the last axis for "
            f"order-{filt.order} zero-phase filtering, got {data.shape[-1]}"
        )
    return signal.sosfiltfilt(filt.sos, data, axis=-1, padtype="even", padlen=padlen)


class FilterBank:
    """Designed band-pass cascade for every band of the bank.

    Parameters
    ----------
    bands : sequence of BandSpec, optional
        Defaults to the seven-band decomposition in DEFAULT_BANDS.
    order : int, default 5
    sample_rate : float, default 250.0
    """

    def __init__(self, bands=DEFAULT_BANDS, order: int = 5, sample_rate: float = 250.0):
        self.bands = tuple(bands)
        self.order = order
        self.sample_rate = sample_rate
        self.filters = tuple(
            design_bandpass(b, order, sample_rate) for b in self.bands
        )

    def __len__(self) -> int:
        return len(self.filters)

    def apply(self, data: np.ndarray, band_index: int) -> np.ndarray:
        """Zero-phase filter ``data`` through one band of the bank."""
        return filtfilt(self.filters[band_index], data)

    def band_names(self) -> list[str]:
        return [b.name for b in self.bands]

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "sample_rate": self.sample_rate,
            "bands": [
                {"name": b.name, "low_hz": b.low_hz, "high_hz": b.high_hz}
                for b in self.bands
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FilterBank":
        bands = [BandSpec(b["name"], b["low_hz"], b["high_hz"]) for b in d["bands"]]
        return cls(bands=bands, order=d["order"], sample_rate=d["sample_rate"])

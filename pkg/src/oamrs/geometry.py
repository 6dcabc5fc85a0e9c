"""Closed-form UCA-to-UCA vortex-wave channel synthesis.

Builds the dense complex channel matrix between a transmit uniform
circular array and a (possibly misaligned) receive UCA, and derives the
Gram-spectrum quantities that feed the capacity model.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi

#: Denominator threshold below which the elevation-angle expression is degenerate.
DEGENERATE_EPS = 1e-12

ZETA_CONVENTIONS = ("geometry_consistent", "paper_literal")


class DegenerateGeometryWarning(UserWarning):
    """Raised (as a warning) when the elevation-angle denominator vanishes."""


def _wrap_angle(a):
    """Wrap an angle (or array of angles) into [0, 2*pi)."""
    return np.mod(a, TWO_PI)


@dataclass(frozen=True)
class UcaSpec:
    """One uniform circular array: element count, radius and per-element phase offsets."""

    element_count: int
    radius: float
    phase_offsets: tuple = None

    def __post_init__(self):
        if self.element_count < 1:
            raise ValueError("element_count must be >= 1")
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if self.phase_offsets is None:
            offsets = np.zeros(self.element_count)
        else:
            offsets = np.asarray(self.phase_offsets, dtype=float)
            if offsets.ndim == 0:
                offsets = np.full(self.element_count, float(offsets))
            if offsets.shape != (self.element_count,):
                raise ValueError("phase_offsets length must equal element_count")
            if not np.all(np.isfinite(offsets)):
                raise ValueError("phase_offsets must be finite")
        object.__setattr__(self, "phase_offsets", tuple(_wrap_angle(offsets)))

    @property
    def offsets(self):
        return np.asarray(self.phase_offsets)


@dataclass(frozen=True)
class LinkGeometry:
    """Transmitter-to-receiver placement: distance plus polar/azimuth misalignment."""

    distance: float
    polar_offset: float = 0.0
    azimuth_offset: float = 0.0

    def __post_init__(self):
        if not self.distance > 0:
            raise ValueError("distance must be positive")
        if not (0.0 <= self.polar_offset < np.pi / 2):
            raise ValueError("polar_offset must lie in [0, pi/2)")
        object.__setattr__(self, "azimuth_offset", float(_wrap_angle(self.azimuth_offset)))


@dataclass(frozen=True)
class PropagationSpec:
    """Carrier wavelength, antenna gain/attenuation factor, elevation-angle convention."""

    wavelength: float
    antenna_factor: float = 4.0 * np.pi
    zeta_convention: str = "geometry_consistent"

    def __post_init__(self):
        if not self.wavelength > 0:
            raise ValueError("wavelength must be positive")
        if not self.antenna_factor > 0:
            raise ValueError("antenna_factor must be positive")
        if self.zeta_convention not in ZETA_CONVENTIONS:
            raise ValueError("unknown zeta_convention %r" % (self.zeta_convention,))


@dataclass(frozen=True)
class ChannelMatrix:
    """Dense N x M complex channel; entry (n, m) couples tx element m to rx element n."""

    entries: np.ndarray = field(repr=False)

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.size == 0:
            raise ValueError("entries must be a nonempty 2-D array")
        if not np.all(np.isfinite(entries)):
            raise ValueError("channel entries must be finite")
        object.__setattr__(self, "entries", entries)

    @property
    def rx_count(self):
        return self.entries.shape[0]

    @property
    def tx_count(self):
        return self.entries.shape[1]


def element_azimuth(element_count, index):
    """Basic angle of a 1-based array element: 2*pi*(index-1)/element_count."""
    if not 1 <= index <= element_count:
        raise ValueError("index %d out of range for %d elements" % (index, element_count))
    return TWO_PI * (index - 1) / element_count


def _alpha(geometry, receiver, n):
    """Receiver-side angle combining basic angle, phase offset and azimuth offset."""
    phi_n = element_azimuth(receiver.element_count, n)
    eta_n = receiver.offsets[n - 1]
    return phi_n + eta_n - geometry.azimuth_offset


def zeta_angle(geometry, receiver, n, convention="geometry_consistent"):
    """Elevation angle entering the phase argument of the channel coefficient.

    The two conventions differ in the cosine numerator.  The default
    ``geometry_consistent`` uses -c*sin(alpha) (c = d*sin(phi)), which makes
    sin^2 + cos^2 = 1 hold exactly, with the sign placing misaligned cases
    in the second quadrant.  ``paper_literal`` keeps the legacy reading with
    cos(alpha) in both numerators: arcsin of the sine expression with the
    quadrant taken from the sign of c*cos(alpha).
    """
    if convention not in ZETA_CONVENTIONS:
        raise ValueError("unknown convention %r" % (convention,))
    r = receiver.radius
    c = geometry.distance * np.sin(geometry.polar_offset)
    alpha = _alpha(geometry, receiver, n)
    radicand = r * r + c * c - 2.0 * r * c * np.cos(alpha)
    denom = np.sqrt(max(radicand, 0.0))
    if denom < DEGENERATE_EPS:
        warnings.warn(
            "degenerate elevation-angle denominator at receive element %d" % n,
            DegenerateGeometryWarning,
        )
        return 0.0
    sin_z = (r - c * np.cos(alpha)) / denom
    if convention == "geometry_consistent":
        cos_z = -c * np.sin(alpha) / denom
        return float(np.arctan2(sin_z, cos_z)) % TWO_PI
    # legacy reading: quadrant from the sign of the cos(alpha) numerator
    sin_z = float(np.clip(sin_z, -1.0, 1.0))
    zeta = float(np.arcsin(sin_z))
    if c * np.cos(alpha) < 0.0:
        zeta = np.pi - zeta
    return zeta % TWO_PI


def amplitude_and_phase_scale(geometry, receiver, propagation, n, tx_radius):
    """Complex amplitude A and phase scale B of one receive element's row."""
    lam = propagation.wavelength
    beta = propagation.antenna_factor
    d = geometry.distance
    R = tx_radius
    r = receiver.radius
    alpha = _alpha(geometry, receiver, n)
    root = np.sqrt(d * d + R * R + r * r)
    sin_phi = np.sin(geometry.polar_offset)
    amp = beta * lam / (4.0 * np.pi * root)
    a = (
        amp
        * np.exp(-1j * TWO_PI * root / lam)
        * np.exp(1j * TWO_PI * r * d * sin_phi * np.cos(alpha) / (lam * root))
    )
    radicand = r * r + (d * sin_phi) ** 2 - 2.0 * r * d * sin_phi * np.cos(alpha)
    b = TWO_PI * R * np.sqrt(max(radicand, 0.0)) / (lam * root)
    return complex(a), float(b)


def channel_coefficient(tx, rx, geometry, propagation, m, n):
    """Channel coefficient from transmit element m to receive element n."""
    a, b = amplitude_and_phase_scale(geometry, rx, propagation, n, tx.radius)
    zeta = zeta_angle(geometry, rx, n, propagation.zeta_convention)
    psi_m = element_azimuth(tx.element_count, m)
    eta_m = tx.offsets[m - 1]
    phi_n = element_azimuth(rx.element_count, n)
    eta_n = rx.offsets[n - 1]
    phase = b * np.sin(psi_m + eta_m - phi_n - eta_n + zeta)
    return a * np.exp(-1j * phase)


def channel_matrix(tx, rx, geometry, propagation):
    """Assemble the full N x M channel matrix over all element pairs."""
    h = np.empty((rx.element_count, tx.element_count), dtype=complex)
    for n in range(1, rx.element_count + 1):
        a, b = amplitude_and_phase_scale(geometry, rx, propagation, n, tx.radius)
        zeta = zeta_angle(geometry, rx, n, propagation.zeta_convention)
        phi_n = element_azimuth(rx.element_count, n)
        eta_n = rx.offsets[n - 1]
        for m in range(1, tx.element_count + 1):
            psi_m = element_azimuth(tx.element_count, m)
            eta_m = tx.offsets[m - 1]
            phase = b * np.sin(psi_m + eta_m - phi_n - eta_n + zeta)
            h[n - 1, m - 1] = a * np.exp(-1j * phase)
    return ChannelMatrix(h)


def gram_eigenvalues(channel, normalize=True):
    """Sorted eigenvalues of the M x M conjugate-transpose product H^H H.

    With ``normalize`` the entries are first reduced to unit modulus, which
    is the convention under which ideal orthogonal-mode channels have all
    Gram eigenvalues equal to the receive element count.
    """
    h = channel.entries if isinstance(channel, ChannelMatrix) else np.asarray(channel, dtype=complex)
    if normalize:
        mags = np.abs(h)
        if np.any(mags == 0.0):
            raise ValueError("cannot normalize a channel with zero-magnitude entries")
        h = h / mags
    gram = h.conj().T @ h
    eigs = np.linalg.eigvalsh(gram)
    return np.sort(np.clip(eigs.real, 0.0, None))


def ideal_mode_matrix(rx_count, modes):
    """Unit-modulus N x M matrix whose column m is the receive-side response of mode m.

    Columns with modes distinct modulo N are mutually orthogonal, so the
    normalized Gram spectrum is rx_count repeated once per mode.
    """
    angles = TWO_PI * np.arange(rx_count)[:, None] / rx_count
    modes = np.asarray(list(modes), dtype=float)[None, :]
    return ChannelMatrix(np.exp(1j * angles * modes))

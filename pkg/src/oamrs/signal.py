"""Rate-splitting transmit structure: precoders, power budget, OAM steering."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import TWO_PI, LinkGeometry, PropagationSpec, UcaSpec


@dataclass(frozen=True)
class RsPrecoder:
    """The three per-pair precoders: one private array per user plus the common array.

    Each array is complex M x N, entry (m, n) weighting the stream from
    transmit element m toward receive element n.
    """

    private_a: np.ndarray = field(repr=False)
    private_b: np.ndarray = field(repr=False)
    common: np.ndarray = field(repr=False)

    def __post_init__(self):
        arrays = []
        for name in ("private_a", "private_b", "common"):
            arr = np.asarray(getattr(self, name), dtype=complex)
            if arr.ndim != 2:
                raise ValueError("%s must be a 2-D array" % name)
            if not np.all(np.isfinite(arr)):
                raise ValueError("%s has non-finite entries" % name)
            arrays.append(arr)
        if not (arrays[0].shape == arrays[1].shape == arrays[2].shape):
            raise ValueError("precoder arrays must share one shape")
        for name, arr in zip(("private_a", "private_b", "common"), arrays):
            object.__setattr__(self, name, arr)

    @property
    def shape(self):
        return self.private_a.shape

    @classmethod
    def zeros(cls, tx_count, rx_count):
        z = np.zeros((tx_count, rx_count), dtype=complex)
        return cls(z, z.copy(), z.copy())


@dataclass(frozen=True)
class PairConfig:
    """One user pair: its OAM mode, serving transmit UCA and the two receive links."""

    pair_index: int
    oam_mode: int
    tx: UcaSpec
    rx_a: UcaSpec
    rx_b: UcaSpec
    geom_a: LinkGeometry
    geom_b: LinkGeometry

    def __post_init__(self):
        if self.oam_mode != int(self.oam_mode):
            raise ValueError("oam_mode must be an integer")
        if self.rx_a is self.rx_b and self.geom_a == self.geom_b:
            raise ValueError("the two receivers of a pair must be distinct")


@dataclass(frozen=True)
class ScenarioConfig:
    """Full downlink scenario: user pairs, noise power, power budget, propagation."""

    pairs: tuple
    noise_power: float
    power_budget: float
    propagation: PropagationSpec
    tau_source: str = "table_preset"
    tau_sq: tuple = None

    def __post_init__(self):
        if not self.noise_power > 0:
            raise ValueError("noise_power must be positive")
        if not self.power_budget > 0:
            raise ValueError("power_budget must be positive")
        if self.tau_source not in ("table_preset", "computed_from_gram"):
            raise ValueError("unknown tau_source %r" % (self.tau_source,))
        pairs = tuple(self.pairs)
        modes = [p.oam_mode for p in pairs]
        if len(set(modes)) != len(modes):
            raise ValueError("OAM modes must be distinct across pairs")
        object.__setattr__(self, "pairs", pairs)
        if self.tau_sq is not None:
            tau = tuple(float(t) for t in self.tau_sq)
            if any(t <= 0 for t in tau):
                raise ValueError("tau_sq entries must be positive")
            object.__setattr__(self, "tau_sq", tau)
        elif self.tau_source == "table_preset":
            raise ValueError("tau_sq required when tau_source is table_preset")


def steering_vector(element_count, mode, offsets=None):
    """Per-element steering phases of one OAM mode across a transmit UCA."""
    psi = TWO_PI * np.arange(element_count) / element_count
    if offsets is not None:
        psi = psi + np.asarray(offsets, dtype=float)
    return np.exp(1j * psi * mode)


def total_power(precoder):
    """Total transmit power: squared entry magnitudes summed over all three arrays."""
    return float(
        np.sum(np.abs(precoder.private_a) ** 2)
        + np.sum(np.abs(precoder.private_b) ** 2)
        + np.sum(np.abs(precoder.common) ** 2)
    )


def scale_to_power(precoder, budget):
    """Project onto the power ball: scale down iff the budget is exceeded."""
    power = total_power(precoder)
    if power == 0.0:
        raise ValueError("cannot scale an identically zero precoder")
    scale = min(1.0, np.sqrt(budget / power))
    if scale == 1.0:
        return precoder
    return replace(
        precoder,
        private_a=precoder.private_a * scale,
        private_b=precoder.private_b * scale,
        common=precoder.common * scale,
    )


def mode_isolation_defect(element_count, modes):
    """Worst normalized inter-mode leakage across a UCA of the given size.

    Zero exactly when no two modes are congruent modulo the element count;
    aliasing modes drive the defect to one.
    """
    modes = list(modes)
    if len(set(modes)) != len(modes):
        raise ValueError("modes must be distinct")
    psi = TWO_PI * np.arange(element_count) / element_count
    worst = 0.0
    for i, l1 in enumerate(modes):
        for l2 in modes[i + 1 :]:
            leak = abs(np.sum(np.exp(1j * psi * (l1 - l2)))) / element_count
            worst = max(worst, float(leak))
    return worst

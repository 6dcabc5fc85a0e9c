"""Per-stream SINRs, capacities and the rate-splitting sum-capacity report."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import ChannelMatrix, channel_matrix, gram_eigenvalues
from .signal import RsPrecoder

LOG2 = np.log(2.0)

#: Interference exclusion readings for the per-(m, n) SINR denominators.
#: "joint" keeps same-grid terms only when both indices differ from the target;
#: "self_only" keeps every same-grid term except the target entry itself.
EXCLUSION_READINGS = ("joint", "self_only")


@dataclass(frozen=True)
class ModeCase:
    """One mode-combination case: mode set, array sizes and Gram eigenvalues."""

    name: str
    modes: tuple
    rx_count: int
    tx_count: int
    tau_sq: tuple

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(int(l) for l in self.modes))
        tau = tuple(float(t) for t in self.tau_sq)
        if len(tau) > min(self.rx_count, self.tx_count):
            raise ValueError("eigenvalue count exceeds the channel rank bound")
        if any(t <= 0 for t in tau):
            raise ValueError("tau_sq entries must be positive")
        object.__setattr__(self, "tau_sq", tau)


@dataclass(frozen=True)
class SinrGrid:
    """Per-(transmit element, receive element) SINR values, all finite and >= 0."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("SINR grid must be finite and nonnegative")
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class RateReport:
    """Capacity breakdown of one user pair, all in bits/s/Hz."""

    private_a: float
    private_b: float
    common_a: float
    common_b: float
    common_pair: float
    split_a: float
    split_b: float

    @property
    def user_a(self):
        return self.private_a + self.split_a

    @property
    def user_b(self):
        return self.private_b + self.split_b

    @property
    def sum(self):
        return self.private_a + self.private_b + self.split_a + self.split_b

    @classmethod
    def zero(cls):
        return cls(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def _gain_grid(channel):
    """|h|^2 arranged as an M x N grid (transposed from the N x M channel)."""
    h = channel.entries if isinstance(channel, ChannelMatrix) else np.asarray(channel)
    return np.abs(h.T) ** 2


def excluded_sum(grid, reading="joint"):
    """Per-entry sum of a grid over the exclusion set of each (m, n) target."""
    if reading not in EXCLUSION_READINGS:
        raise ValueError("unknown exclusion reading %r" % (reading,))
    total = grid.sum()
    if reading == "self_only":
        return total - grid
    return total - grid.sum(axis=1, keepdims=True) - grid.sum(axis=0, keepdims=True) + grid


def sinr_private(channel, precoder, target, noise_power, exclusion="joint"):
    """Private-stream SINR grid for user ``target`` after common-layer SIC.

    Interference combines the other user's entire private precoder with the
    same user's private entries in the exclusion set; the common precoder is
    absent because the common layer is decoded and removed first.
    """
    if noise_power <= 0:
        raise ValueError("noise_power must be positive")
    g = _gain_grid(channel)
    own = precoder.private_a if target == "a" else precoder.private_b
    other = precoder.private_b if target == "a" else precoder.private_a
    if g.shape != own.shape:
        raise ValueError("channel and precoder dimensions disagree")
    own_sq = np.abs(own) ** 2
    num = g * own_sq
    den = noise_power + g * (np.sum(np.abs(other) ** 2) + excluded_sum(own_sq, exclusion))
    return SinrGrid(num / den)


def sinr_common(channel, precoder, target, noise_power, exclusion="joint"):
    """Common-stream SINR grid seen by user ``target`` before SIC.

    Both users' full private precoders interfere, plus common entries in the
    exclusion set of each target entry.
    """
    if noise_power <= 0:
        raise ValueError("noise_power must be positive")
    g = _gain_grid(channel)
    if g.shape != precoder.common.shape:
        raise ValueError("channel and precoder dimensions disagree")
    common_sq = np.abs(precoder.common) ** 2
    private_power = np.sum(np.abs(precoder.private_a) ** 2) + np.sum(np.abs(precoder.private_b) ** 2)
    num = g * common_sq
    den = noise_power + g * (private_power + excluded_sum(common_sq, exclusion))
    return SinrGrid(num / den)


def capacity_from_grid(grid, case):
    """Triple-sum capacity: log2(1 + sinr * tau^2 / M) over grid cells and eigenvalues."""
    values = grid.values if isinstance(grid, SinrGrid) else np.asarray(grid, dtype=float)
    tau = np.asarray(case.tau_sq)
    scaled = values[..., None] * tau / case.tx_count
    return float(np.sum(np.log1p(scaled)) / LOG2)


def common_pair_capacity(common_a, common_b):
    """Pair common capacity: the smaller of the two users' common capacities."""
    if common_a < 0 or common_b < 0:
        raise ValueError("capacities must be nonnegative")
    return min(common_a, common_b)


def split_common(common_pair, policy="equal"):
    """Allocate the pair common capacity between the two users.

    ``policy`` is one of "equal", "all_to_a", "all_to_b", or ("ratio", w)
    with w in [0, 1] giving user a's share.
    """
    if common_pair < 0:
        raise ValueError("common_pair must be nonnegative")
    if policy == "equal":
        w = 0.5
    elif policy == "all_to_a":
        w = 1.0
    elif policy == "all_to_b":
        w = 0.0
    elif isinstance(policy, tuple) and len(policy) == 2 and policy[0] == "ratio":
        w = float(policy[1])
        if not 0.0 <= w <= 1.0:
            raise ValueError("ratio weight must lie in [0, 1]")
    else:
        raise ValueError("unknown split policy %r" % (policy,))
    c_a = w * common_pair
    return c_a, common_pair - c_a


def resolve_tau(scenario, channel):
    """Eigenvalue list per the scenario's tau source: Table preset or Gram spectrum."""
    if scenario.tau_source == "table_preset":
        return tuple(scenario.tau_sq)
    eigs = gram_eigenvalues(channel, normalize=True)
    rank = min(channel.rx_count, channel.tx_count)
    # full-rank assumption: keep the top min(N, M) eigenvalues
    return tuple(eigs[-rank:])


def pair_channels(pair, propagation):
    """Channel matrices toward the pair's two receivers."""
    h_a = channel_matrix(pair.tx, pair.rx_a, pair.geom_a, propagation)
    h_b = channel_matrix(pair.tx, pair.rx_b, pair.geom_b, propagation)
    return h_a, h_b


def _pair_case(pair, receiver, tau):
    return ModeCase(
        "pair-%d" % pair.pair_index,
        (pair.oam_mode,),
        receiver.element_count,
        pair.tx.element_count,
        tau,
    )


def evaluate_pair(pair, precoder, scenario, split_policy="equal", exclusion="joint"):
    """Full rate report of one pair under a fixed precoder."""
    h_a, h_b = pair_channels(pair, scenario.propagation)
    case_a = _pair_case(pair, pair.rx_a, resolve_tau(scenario, h_a))
    case_b = _pair_case(pair, pair.rx_b, resolve_tau(scenario, h_b))
    return report_from_channels(
        h_a, h_b, precoder, scenario.noise_power, case_a, case_b, split_policy, exclusion
    )


def report_from_channels(channel_a, channel_b, precoder, noise_power, case_a, case_b=None,
                         split_policy="equal", exclusion="joint"):
    """Rate report computed directly from the two channel matrices."""
    if case_b is None:
        case_b = case_a
    cp_a = capacity_from_grid(sinr_private(channel_a, precoder, "a", noise_power, exclusion), case_a)
    cp_b = capacity_from_grid(sinr_private(channel_b, precoder, "b", noise_power, exclusion), case_b)
    cc_a = capacity_from_grid(sinr_common(channel_a, precoder, "a", noise_power, exclusion), case_a)
    cc_b = capacity_from_grid(sinr_common(channel_b, precoder, "b", noise_power, exclusion), case_b)
    pair_common = common_pair_capacity(cc_a, cc_b)
    split_a, split_b = split_common(pair_common, split_policy)
    return RateReport(cp_a, cp_b, cc_a, cc_b, pair_common, split_a, split_b)

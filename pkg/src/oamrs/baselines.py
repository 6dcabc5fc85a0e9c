"""Reference access schemes evaluated on the same channel and power budget.

The comparison schemes are textbook reconstructions: SDMA drops the common
layer, NOMA is two-user power-domain superposition with SIC at the stronger
receiver, TDMA time-shares the pair with full power and no interference.
All three reuse the rate-splitting capacity convention (triple sum with
tau^2 / M) so the comparison is apples-to-apples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fp import FpState, optimize_pair, pair_problem
from .metrics import (
    LOG2,
    RateReport,
    _pair_case,
    excluded_sum,
    pair_channels,
    resolve_tau,
)


@dataclass(frozen=True)
class BaselineKind:
    """Scheme selector with per-scheme options."""

    kind: str
    noma_strong_decodes_last: bool = True
    tdma_fractions: tuple = (0.5, 0.5)

    def __post_init__(self):
        if self.kind not in ("sdma", "noma", "tdma"):
            raise ValueError("unknown baseline kind %r" % (self.kind,))
        fa, fb = self.tdma_fractions
        if fa <= 0 or fb <= 0 or abs(fa + fb - 1.0) > 1e-9:
            raise ValueError("tdma fractions must be positive and sum to 1")


def evaluate_sdma(pair, scenario, config, split_policy="equal"):
    """RS machinery with the common precoder forced to zero."""
    problem = pair_problem(pair, scenario, enable_common=False)
    state, report = optimize_pair(problem, config, split_policy)
    return state, report


class _NomaProblem:
    """Quadratic-transform quantities of the two-user NOMA pair."""

    def __init__(self, h_weak, h_strong, tau_weak, tau_strong, noise_power, power_budget,
                 exclusion="joint"):
        self.hw_t = h_weak.T.copy()
        self.hs_t = h_strong.T.copy()
        self.gw = np.abs(self.hw_t) ** 2
        self.gs = np.abs(self.hs_t) ** 2
        self.tx_count = self.hw_t.shape[0]
        self.tau_w = np.asarray(tau_weak, dtype=float)
        self.tau_s = np.asarray(tau_strong, dtype=float)
        self.noise_power = float(noise_power)
        self.power_budget = float(power_budget)
        self.exclusion = exclusion

    def ratio_terms(self, p_weak, p_strong):
        pw_sq = np.abs(p_weak) ** 2
        ps_sq = np.abs(p_strong) ** 2
        a_w = self.hw_t * p_weak
        a_s = self.hs_t * p_strong
        b_w = self.noise_power + self.gw * (ps_sq.sum() + excluded_sum(pw_sq, self.exclusion))
        # post-SIC: the strong user's denominator carries no weak-user term
        b_s = self.noise_power + self.gs * excluded_sum(ps_sq, self.exclusion)
        return (a_w, a_s), (b_w, b_s)


def _cap(q, tau, tx_count):
    args = 1.0 + q[..., None] * tau / tx_count
    if np.any(args <= 0.0):
        return -np.inf
    return float(np.sum(np.log(args)) / LOG2)


def _weight(q, tau, tx_count):
    scale = tau / tx_count
    return np.sum(scale / (1.0 + q[..., None] * scale), axis=-1) / LOG2


def _noma_surrogate(problem, p_weak, p_strong, y_weak, y_strong):
    (a_w, a_s), (b_w, b_s) = problem.ratio_terms(p_weak, p_strong)
    q_w = 2.0 * np.real(np.conj(y_weak) * a_w) - np.abs(y_weak) ** 2 * b_w
    q_s = 2.0 * np.real(np.conj(y_strong) * a_s) - np.abs(y_strong) ** 2 * b_s
    return (
        _cap(q_w, problem.tau_w, problem.tx_count)
        + _cap(q_s, problem.tau_s, problem.tx_count),
        (q_w, q_s),
    )


def _noma_gradient(problem, p_weak, p_strong, y_weak, y_strong, q_w, q_s):
    w_w = _weight(q_w, problem.tau_w, problem.tx_count)
    w_s = _weight(q_s, problem.tau_s, problem.tx_count)
    s_w = w_w * np.abs(y_weak) ** 2 * problem.gw
    s_s = w_s * np.abs(y_strong) ** 2 * problem.gs
    grad_w = w_w * y_weak * np.conj(problem.hw_t) - p_weak * excluded_sum(s_w, problem.exclusion)
    grad_s = (
        w_s * y_strong * np.conj(problem.hs_t)
        - p_strong * (excluded_sum(s_s, problem.exclusion) + s_w.sum())
    )
    return grad_w, grad_s


def _noma_optimize(problem, config):
    rng = np.random.default_rng(config.init_seed)
    shape = problem.hw_t.shape
    draw = lambda: (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    p_w, p_s = draw(), draw()
    power = float(np.sum(np.abs(p_w) ** 2) + np.sum(np.abs(p_s) ** 2))
    scale = np.sqrt(config.init_scale * problem.power_budget / power)
    p_w, p_s = p_w * scale, p_s * scale

    def project(pw, ps):
        power = float(np.sum(np.abs(pw) ** 2) + np.sum(np.abs(ps) ** 2))
        if power <= problem.power_budget:
            return pw, ps
        s = np.sqrt(problem.power_budget / power)
        return pw * s, ps * s

    def update_y(pw, ps):
        (a_w, a_s), (b_w, b_s) = problem.ratio_terms(pw, ps)
        return a_w / b_w, a_s / b_s

    y_w, y_s = update_y(p_w, p_s)
    previous, _ = _noma_surrogate(problem, p_w, p_s, y_w, y_s)
    trace = [previous]
    converged = False
    iterations = 0
    for iteration in range(1, config.max_outer_iterations + 1):
        iterations = iteration
        y_w, y_s = update_y(p_w, p_s)
        current, q = _noma_surrogate(problem, p_w, p_s, y_w, y_s)
        step = None
        for _ in range(config.inner_step_count):
            g_w, g_s = _noma_gradient(problem, p_w, p_s, y_w, y_s, *q)
            norm = np.sqrt(float(np.sum(np.abs(g_w) ** 2) + np.sum(np.abs(g_s) ** 2)))
            if norm == 0.0:
                break
            if step is None:
                step = config.inner_step_size * np.sqrt(problem.power_budget) / norm
            accepted = False
            for _ in range(20):
                cand = project(p_w + step * g_w, p_s + step * g_s)
                value, q_cand = _noma_surrogate(problem, cand[0], cand[1], y_w, y_s)
                if value >= current:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break
            (p_w, p_s), current, q = cand, value, q_cand
            step *= 2.0
        trace.append(current)
        if current - previous <= config.convergence_threshold:
            converged = True
            break
        previous = current
    return p_w, p_s, trace, converged, iterations


def noma_rates(problem, p_weak, p_strong):
    """True per-user NOMA capacities of a fixed precoder pair."""
    (a_w, a_s), (b_w, b_s) = problem.ratio_terms(p_weak, p_strong)
    gamma_w = np.abs(a_w) ** 2 / b_w
    gamma_s = np.abs(a_s) ** 2 / b_s
    return (
        _cap(gamma_w, problem.tau_w, problem.tx_count),
        _cap(gamma_s, problem.tau_s, problem.tx_count),
    )


def evaluate_noma(pair, scenario, config, strong_decodes_last=True):
    """Two-user power-domain NOMA on the pair's channels.

    The user with the stronger mean channel performs SIC (decodes the weak
    user's signal first and cancels it) when ``strong_decodes_last``.
    """
    h_a, h_b = pair_channels(pair, scenario.propagation)
    tau_a = resolve_tau(scenario, h_a)
    tau_b = resolve_tau(scenario, h_b)
    a_strong = np.mean(np.abs(h_a.entries)) >= np.mean(np.abs(h_b.entries))
    if not strong_decodes_last:
        a_strong = not a_strong
    if a_strong:
        h_weak, h_strong, tau_w, tau_s = h_b.entries, h_a.entries, tau_b, tau_a
    else:
        h_weak, h_strong, tau_w, tau_s = h_a.entries, h_b.entries, tau_a, tau_b
    problem = _NomaProblem(h_weak, h_strong, tau_w, tau_s, scenario.noise_power, scenario.power_budget)
    p_w, p_s, trace, converged, iterations = _noma_optimize(problem, config)
    rate_w, rate_s = noma_rates(problem, p_w, p_s)
    rate_a, rate_b = (rate_s, rate_w) if a_strong else (rate_w, rate_s)
    report = RateReport(rate_a, rate_b, 0.0, 0.0, 0.0, 0.0, 0.0)
    return (trace, converged, iterations), report


def single_user_capacity(channel, tau, tx_count, noise_power, power_budget):
    """Interference-free capacity with the budget spread uniformly over entries.

    Entry gains of the closed-form channel are equal, so the uniform split
    is the exact optimum of the symmetric concave allocation problem.
    """
    g = np.abs(channel.entries.T) ** 2
    per_entry = power_budget / g.size
    gamma = g * per_entry / noise_power
    return _cap(gamma, np.asarray(tau, dtype=float), tx_count)


def evaluate_tdma(pair, scenario, fractions=(0.5, 0.5)):
    """Time-shared service: each user alone in its fraction with full power."""
    fa, fb = fractions
    if fa < 0 or fb < 0 or abs(fa + fb - 1.0) > 1e-9:
        raise ValueError("fractions must be nonnegative and sum to 1")
    h_a, h_b = pair_channels(pair, scenario.propagation)
    m = pair.tx.element_count
    cap_a = single_user_capacity(h_a, resolve_tau(scenario, h_a), m,
                                 scenario.noise_power, scenario.power_budget)
    cap_b = single_user_capacity(h_b, resolve_tau(scenario, h_b), m,
                                 scenario.noise_power, scenario.power_budget)
    return RateReport(fa * cap_a, fb * cap_b, 0.0, 0.0, 0.0, 0.0, 0.0)

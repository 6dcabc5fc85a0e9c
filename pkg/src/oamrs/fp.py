"""Fractional-programming precoder optimization via the quadratic transform.

Each per-(m, n) SINR ratio a* b^-1 a is replaced by the concave surrogate
2 Re{y* a} - |y|^2 b with auxiliary y; the algorithm alternates closed-form
auxiliary updates with projected-gradient ascent on the precoder under the
total-power ball, until the surrogate sum capacity stops improving.

The hot path works on stacked arrays: precoders as a (3, M, N) block
(private_a, private_b, common) and per-ratio grids as (4, M, N) blocks
ordered (private_a, private_b, common_a, common_b).  The dataclass
wrappers appear only at the API boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import ChannelMatrix
from .metrics import (
    LOG2,
    ModeCase,
    RateReport,
    _pair_case,
    pair_channels,
    report_from_channels,
    resolve_tau,
)
from .signal import RsPrecoder

GRID_NAMES = ("private_a", "private_b", "common_a", "common_b")


class NumericalFailure(RuntimeError):
    """Raised when the ascent step produces a non-finite gradient."""


@dataclass(frozen=True)
class FpConfig:
    """Knobs of the outer/inner optimization loops."""

    convergence_threshold: float = 1e-4
    max_outer_iterations: int = 500
    inner_step_count: int = 20
    inner_step_size: float = 0.5
    init_seed: int = 0
    init_scale: float = 1.0
    restart_count: int = 1
    #: also try ascending from the optimum of the common-layer-free problem
    warm_start: bool = False

    def __post_init__(self):
        if not self.convergence_threshold > 0:
            raise ValueError("convergence_threshold must be positive")
        if self.max_outer_iterations < 1 or self.inner_step_count < 1 or self.restart_count < 1:
            raise ValueError("iteration counts must be >= 1")
        if not self.inner_step_size > 0:
            raise ValueError("inner_step_size must be positive")
        if not 0.0 < self.init_scale <= 1.0:
            raise ValueError("init_scale must lie in (0, 1]")


@dataclass(frozen=True)
class AuxiliarySet:
    """One auxiliary variable per SINR ratio, indexed like the SINR grids."""

    y_private_a: np.ndarray = field(repr=False)
    y_private_b: np.ndarray = field(repr=False)
    y_common_a: np.ndarray = field(repr=False)
    y_common_b: np.ndarray = field(repr=False)

    @property
    def stack(self):
        return np.stack((self.y_private_a, self.y_private_b, self.y_common_a, self.y_common_b))


@dataclass
class FpState:
    """Outcome of one FP run on one user pair."""

    precoder: RsPrecoder
    auxiliaries: AuxiliarySet
    objective_trace: list
    converged: bool
    iterations_used: int


def _as_stack(precoder):
    return np.stack((precoder.private_a, precoder.private_b, precoder.common))


def _abs_sq(x):
    return x.real * x.real + x.imag * x.imag


def _excl(sq):
    """Per-entry sum over the joint exclusion set, batched over leading axes."""
    tot = sq.sum(axis=(-2, -1), keepdims=True)
    return tot - sq.sum(axis=-1, keepdims=True) - sq.sum(axis=-2, keepdims=True) + sq


def _excl_self(sq):
    return sq.sum(axis=(-2, -1), keepdims=True) - sq


class PairProblem:
    """Precomputed per-pair quantities shared by every surrogate evaluation."""

    def __init__(self, channel_a, channel_b, case_a, case_b=None, noise_power=1.0,
                 power_budget=1.0, enable_common=True, exclusion="joint"):
        h_a = channel_a.entries if isinstance(channel_a, ChannelMatrix) else np.asarray(channel_a, dtype=complex)
        h_b = channel_b.entries if isinstance(channel_b, ChannelMatrix) else np.asarray(channel_b, dtype=complex)
        if case_b is None:
            case_b = case_a
        if exclusion not in ("joint", "self_only"):
            raise ValueError("unknown exclusion reading %r" % (exclusion,))
        self.ha_t = h_a.T.copy()  # M x N, entry (m, n)
        self.hb_t = h_b.T.copy()
        self.ga = _abs_sq(self.ha_t)
        self.gb = _abs_sq(self.hb_t)
        self.tx_count = self.ha_t.shape[0]
        self.tau_a = np.asarray(case_a.tau_sq, dtype=float)
        self.tau_b = np.asarray(case_b.tau_sq, dtype=float)
        self.noise_power = float(noise_power)
        self.power_budget = float(power_budget)
        self.enable_common = bool(enable_common)
        self.exclusion = exclusion
        # stacked views, GRID order
        self.h_stack = np.stack((self.ha_t, self.hb_t, self.ha_t, self.hb_t))
        self.hconj_stack = np.conj(self.h_stack)
        self.g_stack = _abs_sq(self.h_stack)
        if len(self.tau_a) != len(self.tau_b):
            raise ValueError("per-user eigenvalue lists must have equal length")
        self.tau_scaled = np.stack(
            (self.tau_a, self.tau_b, self.tau_a, self.tau_b)
        ) / self.tx_count  # (4, Q)
        self._tau_bcast = self.tau_scaled[:, None, None, :]
        self._excl_fn = _excl if exclusion == "joint" else _excl_self
        self._sel = np.array([0, 1, 2, 2])  # precoder block feeding each grid

    def terms_stacked(self, p_stack):
        """(a, b) of every ratio as (4, M, N) stacks in GRID order."""
        p_sq = _abs_sq(p_stack)
        sums = p_sq.sum(axis=(1, 2))
        excl = self._excl_fn(p_sq)
        a = self.h_stack * p_stack[(0, 1, 2, 2), :, :]
        b = np.empty_like(self.g_stack)
        b[0] = self.ga * (sums[1] + excl[0])
        b[1] = self.gb * (sums[0] + excl[1])
        common_interf = sums[0] + sums[1] + excl[2]
        b[2] = self.ga * common_interf
        b[3] = self.gb * common_interf
        b += self.noise_power
        return a, b

    def ratio_terms(self, precoder):
        """Dict view of the (a, b) stacks keyed by grid name.

        a is complex, b real bounded below by the noise power; a* b^-1 a
        reproduces the SINR grids entry by entry.
        """
        a, b = self.terms_stacked(_as_stack(precoder))
        return dict(zip(GRID_NAMES, a)), dict(zip(GRID_NAMES, b))

    def q_stack(self, p_stack, y_stack):
        """Quadratic-transform ratios 2 Re{y* a} - |y|^2 b, (4, M, N)."""
        a, b = self.terms_stacked(p_stack)
        return 2.0 * (y_stack.real * a.real + y_stack.imag * a.imag) - _abs_sq(y_stack) * b

    def caps(self, q):
        """The four capacity terms; -inf where a log argument is not positive."""
        return self.caps_from_args(1.0 + q[..., None] * self._tau_bcast)

    def value(self, caps):
        common = min(caps[2], caps[3]) if self.enable_common else 0.0
        return float(caps[0] + caps[1] + common)

    def ascend_context(self, y_stack):
        """Quantities of the surrogate that stay fixed while y is fixed."""
        u = _abs_sq(y_stack)
        return {
            "c2": 2.0 * np.conj(y_stack) * self.h_stack,  # 2 y* h
            "un": u * self.noise_power,
            "v": u * self.g_stack,
            "d": y_stack * self.hconj_stack,
        }

    def eval_fast(self, ctx, p_stack):
        """Fused surrogate evaluation: (value, caps, q, log arguments)."""
        p_sq = _abs_sq(p_stack)
        row = p_sq.sum(axis=2, keepdims=True)
        sums = row.sum(axis=(1, 2))
        if self.exclusion == "joint":
            col = p_sq.sum(axis=1, keepdims=True)
            excl = (sums[:, None, None] - row) - col + p_sq
        else:
            excl = sums[:, None, None] - p_sq
        interf = excl[self._sel]
        s01 = sums[0] + sums[1]
        interf += np.array([sums[1], sums[0], s01, s01])[:, None, None]
        q = (ctx["c2"] * p_stack[self._sel]).real - ctx["un"] - ctx["v"] * interf
        args = 1.0 + q[..., None] * self._tau_bcast
        caps = self.caps_from_args(args)
        return self.value(caps), caps, q, args

    def caps_from_args(self, args):
        if args.min() > 0.0:
            return np.log(args).sum(axis=(1, 2, 3)) / LOG2
        out = np.empty(4)
        for i in range(4):
            slab = args[i]
            out[i] = np.log(slab).sum() / LOG2 if slab.min() > 0.0 else -np.inf
        return out

    def grad_fast(self, ctx, p_stack, args, caps):
        """Surrogate gradient reusing the fused-evaluation log arguments."""
        w = (self._tau_bcast / args).sum(axis=-1) / LOG2
        s = w * ctx["v"]
        excl_s = self._excl_fn(s)
        s_sums = s.sum(axis=(1, 2))
        grad = np.empty_like(p_stack)
        if self.enable_common:
            active = 2 if caps[2] <= caps[3] else 3
            s_common = s_sums[active]
        else:
            active = None
            s_common = 0.0
        grad[0] = w[0] * ctx["d"][0] - p_stack[0] * (excl_s[0] + s_sums[1] + s_common)
        grad[1] = w[1] * ctx["d"][1] - p_stack[1] * (excl_s[1] + s_sums[0] + s_common)
        if active is None:
            grad[2] = 0.0
        else:
            grad[2] = w[active] * ctx["d"][active] - p_stack[2] * excl_s[active]
        return grad

    def gradient_stacked(self, p_stack, y_stack, q, caps):
        """Conjugate-coordinate surrogate gradient as a (3, M, N) stack.

        The non-smooth min over the two common terms uses the subgradient
        of the smaller branch, with the a-branch taken on exact ties.
        """
        w = (self.tau_scaled[:, None, None, :]
             / (1.0 + q[..., None] * self.tau_scaled[:, None, None, :])).sum(axis=-1) / LOG2
        s = w * _abs_sq(y_stack) * self.g_stack
        excl_s = self._excl_fn(s)
        s_sums = s.sum(axis=(1, 2))
        grad = np.empty_like(p_stack)
        if self.enable_common:
            active = 2 if caps[2] <= caps[3] else 3
            s_common = s_sums[active]
        else:
            active = None
            s_common = 0.0
        grad[0] = w[0] * y_stack[0] * self.hconj_stack[0] - p_stack[0] * (
            excl_s[0] + s_sums[1] + s_common)
        grad[1] = w[1] * y_stack[1] * self.hconj_stack[1] - p_stack[1] * (
            excl_s[1] + s_sums[0] + s_common)
        if active is None:
            grad[2] = 0.0
        else:
            grad[2] = (w[active] * y_stack[active] * self.hconj_stack[active]
                       - p_stack[2] * excl_s[active])
        return grad


def update_auxiliaries(problem, precoder):
    """Closed-form auxiliary update y = b^-1 a at the current precoder."""
    a, b = problem.terms_stacked(_as_stack(precoder))
    y = a / b
    return AuxiliarySet(*y)


def aux_terms_private(problem, precoder, target, m, n):
    """(a, b) of one private ratio, 1-based element indices."""
    a, b = problem.terms_stacked(_as_stack(precoder))
    idx = 0 if target == "a" else 1
    return complex(a[idx][m - 1, n - 1]), float(b[idx][m - 1, n - 1])


def aux_terms_common(problem, precoder, target, m, n):
    """(a, b) of one common ratio, 1-based element indices."""
    a, b = problem.terms_stacked(_as_stack(precoder))
    idx = 2 if target == "a" else 3
    return complex(a[idx][m - 1, n - 1]), float(b[idx][m - 1, n - 1])


def surrogate_components(problem, precoder, aux):
    """Per-grid quadratic-transform ratios q(y) and the four capacity terms."""
    q = problem.q_stack(_as_stack(precoder), aux.stack)
    caps = problem.caps(q)
    return dict(zip(GRID_NAMES, q)), dict(zip(GRID_NAMES, caps))


def surrogate_objective(problem, precoder, aux):
    """Surrogate sum capacity: both private terms plus the smaller common term."""
    q = problem.q_stack(_as_stack(precoder), aux.stack)
    return problem.value(problem.caps(q))


def surrogate_gradient(problem, precoder, aux):
    """Gradient of the surrogate w.r.t. (private_a, private_b, common)."""
    p_stack = _as_stack(precoder)
    y_stack = aux.stack
    q = problem.q_stack(p_stack, y_stack)
    caps = problem.caps(q)
    grad = problem.gradient_stacked(p_stack, y_stack, q, caps)
    return grad[0], grad[1], grad[2]


def _check_finite(grad):
    if not np.all(np.isfinite(grad)):
        i, m, n = np.argwhere(~np.isfinite(grad))[0]
        raise NumericalFailure(
            "non-finite surrogate gradient at %s[%d, %d]" % (("private_a", "private_b", "common")[i], m, n)
        )


def _power(p_stack):
    return float(_abs_sq(p_stack).sum())


def _project(p_stack, budget):
    power = _power(p_stack)
    if power <= budget:
        return p_stack
    return p_stack * np.sqrt(budget / power)


def _ascend(problem, p_stack, y_stack, config):
    """Projected-gradient ascent on the surrogate with the auxiliaries fixed.

    Runs ``inner_step_count`` steps; each trial step is halved (up to 20
    times) until the surrogate does not decrease, and the iterate is
    projected back onto the power ball after every move.
    """
    budget = problem.power_budget
    ctx = problem.ascend_context(y_stack)
    current, caps, _, args = problem.eval_fast(ctx, p_stack)
    step = None
    for _ in range(config.inner_step_count):
        grad = problem.grad_fast(ctx, p_stack, args, caps)
        _check_finite(grad)
        norm = np.sqrt(_power(grad))
        if norm == 0.0:
            break
        if step is None:
            step = config.inner_step_size * np.sqrt(budget) / norm
        accepted = False
        for _ in range(20):
            candidate = _project(p_stack + step * grad, budget)
            value, caps_cand, _, args_cand = problem.eval_fast(ctx, candidate)
            if value >= current:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        p_stack, current, caps, args = candidate, value, caps_cand, args_cand
        step *= 2.0  # grow again so one failed trial does not pin the step small
    return p_stack, current


def inner_step(problem, precoder, aux, config):
    """Feasibility-preserving ascent step; returns the improved precoder."""
    p_stack, _ = _ascend(problem, _as_stack(precoder), aux.stack, config)
    return RsPrecoder(*p_stack)


def optimize_pair(problem, config, split_policy="equal", trace_hook=None, initial=None):
    """The outer FP loop on one pair: auxiliary updates alternated with ascent.

    With ``restart_count`` > 1 the loop is restarted from consecutive seeds
    and the best final objective wins (the landscape is nonconvex).
    ``initial`` warm-starts from a given precoder instead of a random draw;
    an exactly zero common block is nudged off zero, which is a stationary
    point of the surrogate.  Returns the final state plus the
    true-objective rate report of the optimized precoder.
    """
    if config.restart_count > 1:
        best = None
        for k in range(config.restart_count):
            run_config = replace(config, init_seed=config.init_seed + k, restart_count=1)
            state, report = optimize_pair(problem, run_config, split_policy, trace_hook, initial)
            if best is None or state.objective_trace[-1] > best[0].objective_trace[-1]:
                best = (state, report)
        return best
    if config.warm_start and problem.enable_common and initial is None:
        plain_config = replace(config, warm_start=False)
        best = optimize_pair(problem, plain_config, split_policy, trace_hook)
        restricted = PairProblem(
            problem.ha_t.T, problem.hb_t.T,
            ModeCase("warm-a", (0,), problem.ha_t.shape[1], problem.tx_count, tuple(problem.tau_a)),
            ModeCase("warm-b", (0,), problem.hb_t.shape[1], problem.tx_count, tuple(problem.tau_b)),
            problem.noise_power, problem.power_budget,
            enable_common=False, exclusion=problem.exclusion,
        )
        sdma_state, _ = optimize_pair(restricted, plain_config)
        warmed = optimize_pair(problem, plain_config, split_policy, trace_hook,
                               initial=sdma_state.precoder)
        if warmed[0].objective_trace[-1] > best[0].objective_trace[-1]:
            best = warmed
        return best
    rng = np.random.default_rng(config.init_seed)
    shape = (3,) + problem.ha_t.shape
    if initial is not None:
        p_stack = _as_stack(initial).astype(complex)
        if problem.enable_common and not np.any(p_stack[2]):
            p_stack[2] = 1e-3 * np.sqrt(problem.power_budget / (2.0 * p_stack[2].size)) * (
                rng.standard_normal(p_stack[2].shape) + 1j * rng.standard_normal(p_stack[2].shape))
        p_stack = _project(p_stack, problem.power_budget)
    else:
        p_stack = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
        p_stack *= np.sqrt(config.init_scale * problem.power_budget / _power(p_stack))
    if not problem.enable_common:
        p_stack[2] = 0.0

    def tight_y(p_stack):
        a, b = problem.terms_stacked(p_stack)
        return a / b

    y_stack = tight_y(p_stack)
    previous = problem.value(problem.caps(problem.q_stack(p_stack, y_stack)))
    trace = [previous]
    converged = False
    iterations = 0
    for iteration in range(1, config.max_outer_iterations + 1):
        iterations = iteration
        y_stack = tight_y(p_stack)
        p_stack, value = _ascend(problem, p_stack, y_stack, config)
        trace.append(value)
        if trace_hook is not None:
            trace_hook(iteration, value, _power(p_stack))
        if value - previous <= config.convergence_threshold:
            converged = True
            break
        previous = value
    precoder = RsPrecoder(*p_stack)
    state = FpState(precoder, AuxiliarySet(*y_stack), trace, converged, iterations)
    report = _final_report(problem, precoder, split_policy)
    return state, report


def _final_report(problem, precoder, split_policy):
    case_a = ModeCase("final-a", (0,), problem.ha_t.shape[1], problem.tx_count, tuple(problem.tau_a))
    case_b = ModeCase("final-b", (0,), problem.hb_t.shape[1], problem.tx_count, tuple(problem.tau_b))
    return report_from_channels(
        problem.ha_t.T, problem.hb_t.T, precoder, problem.noise_power,
        case_a, case_b, split_policy, problem.exclusion,
    )


def pair_problem(pair, scenario, enable_common=True, exclusion="joint"):
    """Build the optimization problem of one pair from the scenario."""
    h_a, h_b = pair_channels(pair, scenario.propagation)
    case_a = _pair_case(pair, pair.rx_a, resolve_tau(scenario, h_a))
    case_b = _pair_case(pair, pair.rx_b, resolve_tau(scenario, h_b))
    return PairProblem(
        h_a, h_b, case_a, case_b, scenario.noise_power, scenario.power_budget,
        enable_common=enable_common, exclusion=exclusion,
    )


def optimize(scenario, config, split_policy="equal", enable_common=True, trace_hook=None):
    """Optimize every pair of the scenario independently.

    Pairs on distinct OAM modes are interference-free, so each pair's
    problem decouples; the per-pair seed is derived from the configured
    seed and the pair index.  Returns the list of per-pair states and the
    aggregate rate report.
    """
    states = []
    totals = np.zeros(7)
    for offset, pair in enumerate(scenario.pairs):
        problem = pair_problem(pair, scenario, enable_common=enable_common)
        pair_config = replace(config, init_seed=config.init_seed + 1000003 * offset)
        hook = (lambda it, v, p, _o=offset: trace_hook(_o, it, v, p)) if trace_hook else None
        state, report = optimize_pair(problem, pair_config, split_policy, hook)
        states.append(state)
        totals += np.array([
            report.private_a, report.private_b, report.common_a, report.common_b,
            report.common_pair, report.split_a, report.split_b,
        ])
    return states, RateReport(*totals)

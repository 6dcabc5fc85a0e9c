"""Experiment layer: Table presets, scenario construction, sweeps and CSV output."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from . import baselines, fp
from .geometry import LinkGeometry, PropagationSpec, UcaSpec
from .metrics import ModeCase
from .signal import PairConfig, ScenarioConfig

SCHEMES = ("rs", "sdma", "noma", "tdma")

#: Reconstructed operating point; only trends, not absolute values, are pinned.
DEFAULT_NOISE_POWER = 1e-9
DEFAULT_POWER_BUDGET = 1.0
DEFAULT_DISTANCE = 10.0
DEFAULT_WAVELENGTH = 0.01
DEFAULT_ANTENNA_FACTOR = 4.0 * math.pi
DEFAULT_CASE_ID = 3

CSV_HEADER = "sweep_var,sweep_value,scheme,case,sum_capacity_bps_hz,cap_user_a,cap_user_b,converged,iterations,seed"

_PRESETS = {
    1: ModeCase("case-1", (1, 2), 4, 2, (4.0, 4.0)),
    2: ModeCase("case-2", (1, 2, 3), 5, 3, (5.0, 5.0, 5.0)),
    3: ModeCase("case-3", (1, 2, 3), 4, 3, (4.0, 4.0, 4.0)),
    4: ModeCase("case-4", (1, 2, 3, 4), 4, 4, (4.0, 4.0, 4.0, 4.0)),
}


class ConfigError(ValueError):
    """Invalid or unparseable configuration input."""


def preset_case(case_id):
    """One of the four tabulated mode-combination cases."""
    try:
        return _PRESETS[int(case_id)]
    except (KeyError, TypeError):
        raise ConfigError("unknown case id %r (expected 1..4)" % (case_id,))


@dataclass(frozen=True)
class SweepSpec:
    """Axis and scheme selection of one sweep run."""

    variable: str = "distance"
    start: float = 5.0
    stop: float = 50.0
    points: int = 10
    spacing: str = "linear"
    schemes: tuple = ("rs",)
    case_id: int = DEFAULT_CASE_ID

    def __post_init__(self):
        if self.variable not in ("distance", "power"):
            raise ConfigError("sweep variable must be 'distance' or 'power'")
        if not self.start < self.stop:
            raise ConfigError("sweep start must be below stop")
        if self.points < 2:
            raise ConfigError("sweep needs at least 2 points")
        if self.spacing not in ("linear", "log"):
            raise ConfigError("spacing must be 'linear' or 'log'")
        schemes = tuple(self.schemes)
        for s in schemes:
            if s not in SCHEMES:
                raise ConfigError("unknown scheme %r" % (s,))
        object.__setattr__(self, "schemes", schemes)

    def values(self):
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class ResultRow:
    """One (sweep point, scheme) outcome."""

    sweep_var: str
    sweep_value: float
    scheme: str
    case: str
    sum_capacity: float
    cap_user_a: float
    cap_user_b: float
    converged: bool
    iterations: int
    seed: int


def build_scenario(case=None, distance=DEFAULT_DISTANCE, noise_power=DEFAULT_NOISE_POWER,
                   power_budget=DEFAULT_POWER_BUDGET, wavelength=DEFAULT_WAVELENGTH,
                   antenna_factor=DEFAULT_ANTENNA_FACTOR, polar_offset=0.0,
                   azimuth_offset=0.0, tau_source="table_preset"):
    """Scenario for one mode-combination case under the documented radius rules.

    The k-th pair's transmit UCA has radius k * wavelength; the i-th
    receiver's UCA has radius i * wavelength with receivers numbered
    2k-1, 2k across pairs.
    """
    if case is None:
        case = preset_case(DEFAULT_CASE_ID)
    propagation = PropagationSpec(wavelength=wavelength, antenna_factor=antenna_factor)
    pairs = []
    for k, mode in enumerate(case.modes, start=1):
        tx = UcaSpec(case.tx_count, k * wavelength)
        rx_a = UcaSpec(case.rx_count, (2 * k - 1) * wavelength)
        rx_b = UcaSpec(case.rx_count, (2 * k) * wavelength)
        geom = LinkGeometry(distance, polar_offset, azimuth_offset)
        pairs.append(PairConfig(k, mode, tx, rx_a, rx_b, geom, geom))
    return ScenarioConfig(
        pairs=tuple(pairs),
        noise_power=noise_power,
        power_budget=power_budget,
        propagation=propagation,
        tau_source=tau_source,
        tau_sq=case.tau_sq if tau_source == "table_preset" else None,
    )


def default_scenario():
    """The baseline single-case scenario with every documented default."""
    return build_scenario()


def with_distance(scenario, distance):
    pairs = tuple(
        replace(p, geom_a=replace(p.geom_a, distance=distance),
                geom_b=replace(p.geom_b, distance=distance))
        for p in scenario.pairs
    )
    return replace(scenario, pairs=pairs)


def with_power(scenario, power_budget):
    return replace(scenario, power_budget=power_budget)


_SCENARIO_KEYS = {
    "case_id": int,
    "distance": float,
    "noise_power": float,
    "power_budget": float,
    "wavelength": float,
    "antenna_factor": float,
    "polar_offset": float,
    "azimuth_offset": float,
    "tau_source": str,
}
_SWEEP_KEYS = {
    "variable": str,
    "start": float,
    "stop": float,
    "points": int,
    "spacing": str,
    "schemes": tuple,
    "case_id": int,
}
_FP_KEYS = {
    "convergence_threshold": float,
    "max_outer_iterations": int,
    "inner_step_count": int,
    "inner_step_size": float,
    "init_seed": int,
    "init_scale": float,
    "restart_count": int,
    "warm_start": bool,
}


def _coerce(section, raw, allowed):
    out = {}
    for key, value in raw.items():
        if key not in allowed:
            raise ConfigError("unknown key %r in section %r" % (key, section))
        cast = allowed[key]
        try:
            out[key] = tuple(value) if cast is tuple else cast(value)
        except (TypeError, ValueError):
            raise ConfigError("invalid value for %s.%s: %r" % (section, key, value))
    return out


def load_scenario(path):
    """Parse a config file into (scenario, sweep, fp config).

    The file is a JSON object with optional "scenario", "sweep" and "fp"
    sections; every omitted field takes its documented default, unknown
    keys are rejected.  An empty file yields all defaults.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError("cannot read config file: %s" % exc)
    if not text.strip():
        doc = {}
    else:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("config parse error at line %d: %s" % (exc.lineno, exc.msg))
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    unknown = set(doc) - {"scenario", "sweep", "fp"}
    if unknown:
        raise ConfigError("unknown top-level key %r" % (sorted(unknown)[0],))

    scen_kwargs = _coerce("scenario", doc.get("scenario", {}), _SCENARIO_KEYS)
    case = preset_case(scen_kwargs.pop("case_id", DEFAULT_CASE_ID))
    try:
        scenario = build_scenario(case=case, **scen_kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc))

    sweep_kwargs = _coerce("sweep", doc.get("sweep", {}), _SWEEP_KEYS)
    sweep = SweepSpec(**sweep_kwargs)
    try:
        fp_config = fp.FpConfig(**_coerce("fp", doc.get("fp", {}), _FP_KEYS))
    except ValueError as exc:
        raise ConfigError(str(exc))
    return scenario, sweep, fp_config


def evaluate_scheme(scenario, scheme, config, split_policy="equal"):
    """Aggregate rate report of one scheme over every pair of the scenario.

    Returns (report, converged, iterations).
    """
    if scheme == "rs":
        states, report = fp.optimize(scenario, config, split_policy)
        return report, all(s.converged for s in states), max(s.iterations_used for s in states)
    if scheme == "sdma":
        states, report = fp.optimize(scenario, config, split_policy, enable_common=False)
        return report, all(s.converged for s in states), max(s.iterations_used for s in states)
    if scheme == "noma":
        totals = np.zeros(7)
        converged, iterations = True, 0
        for offset, pair in enumerate(scenario.pairs):
            pair_config = replace(config, init_seed=config.init_seed + 1000003 * offset)
            (_, ok, used), rep = baselines.evaluate_noma(pair, scenario, pair_config)
            converged &= ok
            iterations = max(iterations, used)
            totals += _report_vector(rep)
        return _report_from_vector(totals), converged, iterations
    if scheme == "tdma":
        totals = np.zeros(7)
        for pair in scenario.pairs:
            totals += _report_vector(baselines.evaluate_tdma(pair, scenario))
        return _report_from_vector(totals), True, 0
    raise ConfigError("unknown scheme %r" % (scheme,))


def _report_vector(report):
    return np.array([
        report.private_a, report.private_b, report.common_a, report.common_b,
        report.common_pair, report.split_a, report.split_b,
    ])


def _report_from_vector(v):
    from .metrics import RateReport

    return RateReport(*v)


def scenario_for_case(scenario, case):
    """Rebuild the scenario's pairs for another case, keeping its scalar settings."""
    geom = scenario.pairs[0].geom_a
    return build_scenario(
        case=case,
        distance=geom.distance,
        noise_power=scenario.noise_power,
        power_budget=scenario.power_budget,
        wavelength=scenario.propagation.wavelength,
        antenna_factor=scenario.propagation.antenna_factor,
        polar_offset=geom.polar_offset,
        azimuth_offset=geom.azimuth_offset,
        tau_source=scenario.tau_source,
    )


def run_sweep(scenario, sweep, fp_config):
    """Evaluate every (sweep point, scheme) combination independently."""
    case = preset_case(sweep.case_id)
    base = scenario_for_case(scenario, case)
    rows = []
    for value in sweep.values():
        if sweep.variable == "distance":
            point = with_distance(base, float(value))
        else:
            point = with_power(base, float(value))
        for scheme in sweep.schemes:
            try:
                report, converged, iterations = evaluate_scheme(point, scheme, fp_config)
            except fp.NumericalFailure:
                rows.append(ResultRow(sweep.variable, float(value), scheme, case.name,
                                      0.0, 0.0, 0.0, False, 0, fp_config.init_seed))
                continue
            rows.append(ResultRow(
                sweep.variable, float(value), scheme, case.name,
                report.sum, report.user_a, report.user_b,
                converged, iterations, fp_config.init_seed,
            ))
    return rows


def _fmt(x):
    return "%.9g" % x


def emit_csv(rows, path):
    """Write the sweep rows with the fixed 10-column schema, LF line endings."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(",".join([
            r.sweep_var, _fmt(r.sweep_value), r.scheme, r.case,
            _fmt(r.sum_capacity), _fmt(r.cap_user_a), _fmt(r.cap_user_b),
            "true" if r.converged else "false", str(r.iterations), str(r.seed),
        ]))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def parse_csv(path):
    """Round-trip reader for the emitted schema."""
    with open(path, "r", encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ConfigError("unexpected CSV header in %s" % path)
    rows = []
    for line in lines[1:]:
        parts = line.split(",")
        rows.append(ResultRow(
            parts[0], float(parts[1]), parts[2], parts[3],
            float(parts[4]), float(parts[5]), float(parts[6]),
            parts[7] == "true", int(parts[8]), int(parts[9]),
        ))
    return rows

"""Scikit-learn style wrapper around the precoder optimizer.

Lets the FP precoder compose with pipelines and parameter search: the
optimizer hyper-parameters are constructor params, ``fit`` consumes a
scenario, and the optimized precoders / rate report become trailing-
underscore attributes.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator

from . import harness
from .fp import FpConfig


class RatePrecoder(BaseEstimator):
    """Sum-capacity precoder optimizer with an estimator interface.

    Parameters mirror the FP configuration; ``scheme`` selects the access
    scheme ("rs", "sdma", "noma" or "tdma").
    """

    def __init__(self, scheme="rs", convergence_threshold=1e-4, max_outer_iterations=500,
                 inner_step_count=20, inner_step_size=0.5, init_seed=0, init_scale=1.0,
                 restart_count=1, warm_start=False):
        self.scheme = scheme
        self.convergence_threshold = convergence_threshold
        self.max_outer_iterations = max_outer_iterations
        self.inner_step_count = inner_step_count
        self.inner_step_size = inner_step_size
        self.init_seed = init_seed
        self.init_scale = init_scale
        self.restart_count = restart_count
        self.warm_start = warm_start

    def _config(self):
        return FpConfig(
            convergence_threshold=self.convergence_threshold,
            max_outer_iterations=self.max_outer_iterations,
            inner_step_count=self.inner_step_count,
            inner_step_size=self.inner_step_size,
            init_seed=self.init_seed,
            init_scale=self.init_scale,
            restart_count=self.restart_count,
            warm_start=self.warm_start,
        )

    def fit(self, scenario, y=None):
        report, converged, iterations = harness.evaluate_scheme(
            scenario, self.scheme, self._config()
        )
        self.report_ = report
        self.converged_ = converged
        self.iterations_ = iterations
        return self

    def score(self, scenario=None, y=None):
        """Sum capacity of the fitted run (refits when a scenario is given)."""
        if scenario is not None:
            self.fit(scenario)
        if not hasattr(self, "report_"):
            raise RuntimeError("call fit before score")
        return self.report_.sum

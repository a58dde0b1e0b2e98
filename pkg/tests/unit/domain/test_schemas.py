"""
Test suite for Schemas
"""

import numpy as np
import pytest
from pydantic import ValidationError

from ntklab.domain.models.enums import RegressionKind, SuiteName
from ntklab.domain.schemas.config import DataConfig, FlowSpec, RegressionSpec, SeedsSpec, TrainConfig
from ntklab.domain.schemas.report import SeedOutcome, SuiteReport
from ntklab.domain.schemas.suites import EstimationSuiteConfig, KernelSuiteConfig, VerifyConfig


class TestConfigSchemas:
    """
    Test cases for run configuration schemas
    """

    def test_unknown_keys_are_rejected(self):
        """
        GIVEN a train config with a misspelled key
        WHEN it is parsed
        THEN a ValidationError is raised
        """
        with pytest.raises(ValidationError):
            TrainConfig.model_validate_json('{"d": 4, "m": 64, "n": 10, "epsilonn": 0.1}')

    def test_out_of_range_values_are_rejected(self):
        """
        GIVEN epsilon = 1.5
        WHEN a train config is parsed
        THEN a ValidationError is raised
        """
        with pytest.raises(ValidationError):
            TrainConfig(d=4, m=64, n=10, epsilon=1.5)

    def test_empirical_runs_need_a_sample_size(self):
        """
        GIVEN no n
        WHEN an empirical and a population config are built
        THEN only the population one is valid
        """
        with pytest.raises(ValidationError):
            TrainConfig(d=4, m=64)

        assert TrainConfig(d=4, m=64, mode="population").n is None

    def test_regression_spec_builds_functions(self):
        """
        GIVEN linear, harmonic and custom specs
        WHEN they are built in d = 4
        THEN the matching regression functions come out
        """
        linear = RegressionSpec(norm=0.5).build(4)
        harmonic = RegressionSpec(kind="harmonic", constant=0.2).build(4)
        custom = RegressionSpec(kind="custom", name="abs_ridge", scale=0.5).build(4)

        np.testing.assert_array_equal(linear.beta, [0.5, 0.0, 0.0, 0.0])
        assert harmonic.kind == RegressionKind.HARMONIC
        assert harmonic.harmonic_orders() == {0}
        assert custom.sup_bound == 0.5

    def test_custom_spec_needs_a_name(self):
        """
        GIVEN a custom target without a name
        WHEN it is parsed
        THEN a ValidationError is raised
        """
        with pytest.raises(ValidationError):
            RegressionSpec(kind="custom")

    def test_flow_spec_fits_the_horizon(self):
        """
        GIVEN a flow section without eta
        WHEN it is built for t_end = 1
        THEN eta is fitted below max_eta
        """
        config = FlowSpec(max_eta=0.3).build(1.0, seed=5)

        assert config.eta == pytest.approx(0.25)
        assert config.seed == 5

    def test_initial_gram_needs_a_width(self):
        """
        GIVEN an initial Gram export without m
        WHEN a data config is built
        THEN a ValidationError is raised
        """
        with pytest.raises(ValidationError):
            DataConfig(d=4, n=10, gram="initial")

    def test_seed_resolution(self):
        """
        GIVEN explicit seeds, a base and a count, or only a count
        WHEN seeds are resolved
        THEN the list, the base range and the default range come out
        """
        assert SeedsSpec(values=[3, 1]).resolve() == [3, 1]
        assert SeedsSpec(base=10, count=3).resolve() == [10, 11, 12]
        assert SeedsSpec(count=2).resolve(default_base=5) == [5, 6]

    def test_repeated_seeds_are_rejected(self):
        """
        GIVEN a seed list with repeats
        WHEN it is parsed
        THEN a ValidationError is raised
        """
        with pytest.raises(ValidationError):
            SeedsSpec(values=[1, 1])


class TestSuiteSchemas:
    """
    Test cases for verification suite configurations and reports
    """

    def test_defaults_cover_every_suite(self):
        """
        GIVEN the default verify config
        WHEN its suites are listed
        THEN every suite is included
        """
        assert set(VerifyConfig().suites) == {suite.value for suite in SuiteName}

    def test_ladders_must_increase(self):
        """
        GIVEN width and sample-size ladders that do not increase
        WHEN the suite configs are built
        THEN a ValidationError is raised
        """
        with pytest.raises(ValidationError):
            KernelSuiteConfig(widths=[1024, 256])
        with pytest.raises(ValidationError):
            KernelSuiteConfig(widths=[255, 1024])
        with pytest.raises(ValidationError):
            EstimationSuiteConfig(ladder=[50])

    def test_seed_outcome_uses_pass_alias(self):
        """
        GIVEN a seed outcome
        WHEN it is dumped
        THEN its pass flag is written as 'pass'
        """
        outcome = SeedOutcome(seed=1, passed=True, checks={"a": True}, values={"x": 1.0})

        assert outcome.model_dump()["pass"] is True

    def test_verdict_must_follow_from_marginals(self):
        """
        GIVEN a marginal below its threshold
        WHEN a report claims a positive verdict
        THEN a ValidationError is raised
        """
        fields = {
            "suite": "events",
            "config": {},
            "thresholds": {"a": 0.9},
            "per_seed": [],
            "marginals": {"a": 0.5},
            "frequency": 0.5,
        }

        with pytest.raises(ValidationError):
            SuiteReport(**fields, verdict=True)
        assert SuiteReport(**fields, verdict=False).verdict is False

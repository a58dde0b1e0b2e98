import logging
import math

import pytest

from ntklab.domain.errors import ConfigError, NumericalError, ScaleError
from ntklab.domain.models.enums import SuiteName
from ntklab.domain.schemas.config import NoiseSpec, RegressionSpec, SeedsSpec
from ntklab.domain.schemas.suites import (
    ApproxSuiteConfig,
    BenignSuiteConfig,
    EstimationSuiteConfig,
    EventsSuiteConfig,
    KernelSuiteConfig,
    OverfitSuiteConfig,
    VerifyConfig,
)
from ntklab.service_layer.verify_service import VerifyService, build_report, seed_outcome

SEEDS = [0, 1, 2]

EVENTS = EventsSuiteConfig(d=4, n=16, m=64)
KERNEL = KernelSuiteConfig(d=4, probes=64, widths=[64, 256])
OVERFIT = OverfitSuiteConfig(d=4, n=12, m=64, epsilon=0.5, checkpoint_every=20)
APPROX = ApproxSuiteConfig(d=4, m=64, epsilon=0.5, pop_batch=256, mc_risk=1000, checkpoint_every=20)
ESTIMATION = EstimationSuiteConfig(
    d=4, m=64, ladder=[8, 16], epsilon=0.5, pop_batch=256, mc_risk=1000, checkpoint_every=40
)
BENIGN = BenignSuiteConfig(d=4, n=12, m=64, epsilon=0.5, pop_batch=256, mc_risk=1000, checkpoint_every=40)


class TestReport:
    def test_seed_outcome_rejects_non_finite_values(self):
        """
        GIVEN a nan measurement
        WHEN a seed outcome is packed
        THEN a NumericalError is raised
        """
        with pytest.raises(NumericalError):
            seed_outcome(0, {"a": True}, {"x": math.nan})

    def test_frequencies_and_verdict(self):
        """
        GIVEN three seeds passing check a twice and check b always
        WHEN the report is built with threshold 0.6
        THEN the marginals, the joint frequency and the verdict follow
        """
        outcomes = [
            seed_outcome(2, {"a": True, "b": True}, {}),
            seed_outcome(0, {"a": False, "b": True}, {}),
            seed_outcome(1, {"a": True, "b": True}, {}),
        ]

        report = build_report(SuiteName.EVENTS, {}, outcomes, {"a": 0.6, "b": 0.6})

        assert [outcome.seed for outcome in report.per_seed] == [0, 1, 2]
        assert report.marginals == {"a": pytest.approx(2 / 3), "b": 1.0}
        assert report.frequency == pytest.approx(2 / 3)
        assert report.verdict is True

    def test_failed_aggregate_fails_the_verdict(self):
        """
        GIVEN all seeds passing but a failed aggregate check
        WHEN the report is built
        THEN the verdict is negative
        """
        outcomes = [seed_outcome(0, {"a": True}, {})]

        report = build_report(SuiteName.KERNEL, {}, outcomes, {"a": 0.5}, aggregates={"medians_decreasing": False})

        assert report.frequency == 1.0
        assert report.verdict is False

    def test_no_seeds(self):
        """
        GIVEN no outcomes
        WHEN the report is built
        THEN a ConfigError is raised
        """
        with pytest.raises(ConfigError):
            build_report(SuiteName.EVENTS, {}, [], {})


class TestVerifyService:
    @pytest.fixture
    def service(self, settings, suite_settings):
        return VerifyService(settings, suite_settings)

    def test_default_seeds(self, service, caplog):
        """
        GIVEN a seed count without base and no NTKLAB_SEED
        WHEN the seeds are resolved
        THEN they start at 0 and a warning is logged
        """
        with caplog.at_level(logging.WARNING):
            seeds = service.seeds_for(SeedsSpec(count=3))

        assert seeds == [0, 1, 2]
        assert "falling back to seed 0" in caplog.text

    def test_events_suite(self, service):
        """
        GIVEN more points than dimensions
        WHEN the events suite runs
        THEN the analytical Gram bound n/(5d) never holds, since the Gram trace is n/2
        """
        report = service.suite_events(EVENTS, SEEDS)

        assert report.suite == "events"
        assert len(report.per_seed) == 3
        assert report.marginals["gram_analytical_min"] == 0.0
        assert report.marginals["boundary"] == 1.0
        assert report.verdict is False

    def test_events_scale_cap(self, service):
        """
        GIVEN a width above the events cap
        WHEN the events suite runs
        THEN a ScaleError is raised
        """
        with pytest.raises(ScaleError):
            service.suite_events(EventsSuiteConfig(d=4, n=16, m=2**20), SEEDS)

    def test_parallel_seeds_give_the_same_report(self, settings, suite_settings):
        """
        GIVEN one and two jobs
        WHEN the events suite runs on the same seeds
        THEN the reports are identical
        """
        serial = VerifyService(settings, suite_settings, jobs=1).suite_events(EVENTS, SEEDS)
        parallel = VerifyService(settings, suite_settings, jobs=2).suite_events(EVENTS, SEEDS)

        assert serial.model_dump() == parallel.model_dump()

    def test_kernel_suite(self, service):
        """
        GIVEN a two-width ladder
        WHEN the kernel suite runs
        THEN every width has both checks and the medians are reported
        """
        report = service.suite_kernel(KERNEL, SEEDS)

        assert set(report.thresholds) == {"envelope_64", "envelope_256", "operator_norm_64", "operator_norm_256"}
        assert set(report.informational["median_difference"]) == {"64", "256"}
        assert "medians_decreasing" in report.aggregates

    def test_overfit_suite(self, service):
        """
        GIVEN a small noiseless training set
        WHEN the overfit suite runs
        THEN the horizon is 8d log(2/epsilon) and monotone descent must hold on every seed
        """
        report = service.suite_overfit(OVERFIT, SEEDS)

        assert report.thresholds["monotone"] == 1.0
        assert report.surrogate_flags == {"envelope": True}
        assert report.config["t_end"] == pytest.approx(32.0 * math.log(4.0))
        assert all(outcome.values["final_risk"] >= 0.0 for outcome in report.per_seed)

    def test_approx_suite(self, service):
        """
        GIVEN a linear f* in d = 4
        WHEN the approximation suite runs
        THEN the plan is recorded and every seed reports its final error
        """
        report = service.suite_approx(APPROX, SEEDS)

        assert report.config["plan"]["L_epsilon"] == 4
        assert set(report.thresholds) == {"decay", "final", "movement"}
        assert all("final_error" in outcome.values for outcome in report.per_seed)

    def test_approx_suite_needs_an_exact_plan(self, service):
        """
        GIVEN a custom f*
        WHEN the approximation suite runs
        THEN a ConfigError is raised
        """
        config = APPROX.model_copy(update={"f": RegressionSpec(kind="custom", name="abs_ridge", scale=0.5)})

        with pytest.raises(ConfigError):
            service.suite_approx(config, SEEDS)

    def test_estimation_suite(self, service):
        """
        GIVEN a sample-size ladder
        WHEN the estimation suite runs
        THEN the gap starts at zero on every seed and a gap is reported per sample size
        """
        report = service.suite_estimation(ESTIMATION, SEEDS)

        assert report.marginals["gap_zero"] == 1.0
        assert set(report.informational["median_gap"]) == {"8", "16"}
        assert report.surrogate_flags == {"gap_decreasing": True}

    def test_benign_suite_observes_large_noise(self, service):
        """
        GIVEN noisy labels and the large-noise observation switched on
        WHEN the benign suite runs
        THEN the large-noise medians are reported next to the verdict
        """
        report = service.suite_benign(BENIGN, SEEDS)

        assert report.informational["large_noise"]["half_width"] == 0.5
        assert all("large_noise_excess_risk" in outcome.values for outcome in report.per_seed)

    def test_benign_suite_without_observation(self, service):
        """
        GIVEN the large-noise observation switched off
        WHEN the benign suite runs
        THEN nothing is reported about it
        """
        config = BENIGN.model_copy(update={"observe_noise": False, "noise": NoiseSpec(kind="uniform", half_width=0.1)})

        report = service.suite_benign(config, [0])

        assert "large_noise" not in report.informational

    def test_run_selected_suites(self, service):
        """
        GIVEN a verify config with explicit seeds
        WHEN only the events suite is requested
        THEN one events report comes back on those seeds
        """
        config = VerifyConfig(seeds=SeedsSpec(values=[4, 5]), events=EVENTS)

        reports = service.run(config, [SuiteName.EVENTS])

        assert [report.suite for report in reports] == ["events"]
        assert [outcome.seed for outcome in reports[0].per_seed] == [4, 5]

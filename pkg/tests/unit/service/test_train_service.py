import json

import numpy as np
import pytest

from ntklab.adapters.codecs import decode_checkpoint
from ntklab.adapters.storage import ArtifactStore
from ntklab.domain.errors import ConfigError, PlanInfeasibleError
from ntklab.domain.models.enums import FlowMode
from ntklab.domain.schemas.config import FlowSpec, RegressionSpec, TrainConfig
from ntklab.service_layer.train_service import TrainService


class TestTrainService:
    @pytest.fixture
    def service(self, settings):
        return TrainService(settings)

    @pytest.fixture
    def config(self):
        return TrainConfig(d=4, m=64, n=20, epsilon=0.5, seed=3, flow=FlowSpec(t_end=2.0, checkpoint_every=2))

    def test_effective_config(self, service):
        """
        GIVEN a config without seed and a mode override
        WHEN the effective config is built
        THEN the seed and the mode are filled in
        """
        effective = service.effective_config(TrainConfig(d=4, m=64, n=20), FlowMode.JOINT)

        assert effective.seed == 0
        assert effective.mode == FlowMode.JOINT

    def test_empirical_override_needs_n(self, service):
        """
        GIVEN a population config switched to empirical mode without n
        WHEN the effective config is built
        THEN a ConfigError is raised
        """
        with pytest.raises(ConfigError):
            service.effective_config(TrainConfig(d=4, m=64, mode="population"), FlowMode.EMPIRICAL)

    def test_empirical_run_writes_artifacts(self, service, config, tmp_path):
        """
        GIVEN a short empirical run
        WHEN its artifacts are written
        THEN the trajectory, checkpoint, sidecar, config echo and manifest exist
        """
        result = service.run(config)
        service.write(result, ArtifactStore(tmp_path))

        assert result.plan is None
        assert sorted(path.name for path in tmp_path.iterdir()) == [
            "checkpoint.bin",
            "checkpoint.json",
            "config.json",
            "manifest.json",
            "trajectory.csv",
        ]
        restored = decode_checkpoint((tmp_path / "checkpoint.bin").read_bytes())
        np.testing.assert_array_equal(restored.W, result.trajectory.final_state.W)
        sidecar = json.loads((tmp_path / "checkpoint.json").read_text())
        assert sidecar["seed"] == 3
        assert sidecar["step"] == result.trajectory.final.step
        assert sidecar["t"] == pytest.approx(2.0)

    def test_runs_are_reproducible(self, service, config, tmp_path):
        """
        GIVEN the same effective config twice
        WHEN both runs are written
        THEN the trajectories and checkpoints are byte-identical
        """
        for name in ("first", "second"):
            service.write(service.run(config), ArtifactStore(tmp_path / name))

        for artifact in ("trajectory.csv", "checkpoint.bin", "config.json", "manifest.json"):
            assert (tmp_path / "first" / artifact).read_bytes() == (tmp_path / "second" / artifact).read_bytes()

    def test_horizon_comes_from_the_plan(self, service):
        """
        GIVEN a population run without t_end
        WHEN it runs
        THEN the flow stops at the planned horizon
        """
        config = TrainConfig(
            d=4,
            m=64,
            mode="population",
            epsilon=0.9,
            seed=1,
            flow=FlowSpec(pop_batch=256, mc_risk=1000, checkpoint_every=50),
        )

        result = service.run(config)

        assert result.plan is not None
        assert result.plan.L_epsilon == 4
        assert result.trajectory.final.t == pytest.approx(result.plan.T_epsilon)

    def test_infeasible_plan(self, service):
        """
        GIVEN a cubic ridge in d = 3 and epsilon = 0.1
        WHEN a population run is planned
        THEN a PlanInfeasibleError is raised
        """
        config = TrainConfig(
            d=3,
            m=64,
            mode="population",
            epsilon=0.1,
            seed=1,
            f=RegressionSpec(kind="custom", name="cubic_ridge"),
        )

        with pytest.raises(PlanInfeasibleError):
            service.run(config)

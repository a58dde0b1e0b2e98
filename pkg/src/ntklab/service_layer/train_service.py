"""Service running one training configuration end to end: plan, data, initialization, flow and artifacts."""

import json
import logging
from typing import Optional

from pydantic import BaseModel, ConfigDict

from ntklab.adapters.codecs import (
    checkpoint_sidecar,
    encode_checkpoint,
    encode_trajectory_csv,
    encode_trajectory_json,
)
from ntklab.adapters.storage import ArtifactStore
from ntklab.domain.errors import ConfigError
from ntklab.domain.models.enums import FlowMode, OutputFormat
from ntklab.domain.models.flow import FlowConfig, Trajectory, run_empirical, run_joint, run_population
from ntklab.domain.models.network import init_antisymmetric
from ntklab.domain.models.spectrum import EpsilonPlan, build_spectrum, plan_epsilon
from ntklab.domain.models.sphere import make_dataset
from ntklab.domain.models.streams import named_stream
from ntklab.domain.schemas.config import TrainConfig
from ntklab.service_layer.seeding import resolve_seed
from ntklab.settings.lab_settings import LabSettings

log = logging.getLogger(__name__)


class TrainResult(BaseModel):
    """What a training run produced."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: TrainConfig
    flow: FlowConfig
    plan: Optional[EpsilonPlan] = None
    trajectory: Trajectory


class TrainService:
    """Application service for training runs."""

    def __init__(self, settings: LabSettings):
        """Initialize train service."""
        self.settings = settings

    def effective_config(self, config: TrainConfig, mode: Optional[FlowMode] = None) -> TrainConfig:
        """Applies the command-line mode and resolves the seed, so the echoed config reproduces the run."""
        update: dict = {"seed": resolve_seed(config.seed, self.settings)}
        if mode is not None:
            update["mode"] = FlowMode(mode).value
        effective = config.model_copy(update=update)
        if effective.mode != FlowMode.POPULATION and effective.n is None:
            raise ConfigError(f"mode {effective.mode} needs the sample size n")
        return effective

    def run(self, config: TrainConfig) -> TrainResult:
        """Runs an effective config (see :meth:`effective_config`)."""
        assert config.seed is not None
        seed, d = config.seed, config.d
        f = config.f.build(d)
        plan = None
        if config.flow.t_end is None or config.mode != FlowMode.EMPIRICAL:
            table = build_spectrum(d, config.h_max)
            plan = plan_epsilon(f, d, config.epsilon, table, config.mc_budget, named_stream(seed, "plan"))
            log.info("Planned L_eps=%s lambda_eps=%.6g T_eps=%.6g", plan.L_epsilon, plan.lambda_epsilon, plan.T_epsilon)
        t_end = config.flow.t_end if config.flow.t_end is not None else plan.T_epsilon  # type: ignore[union-attr]
        flow = config.flow.build(t_end, seed)
        flow.validate_for(d)

        state_0 = init_antisymmetric(config.m, d, named_stream(seed, "init"))
        if config.mode == FlowMode.POPULATION:
            trajectory = run_population(state_0, f, flow)
        else:
            assert config.n is not None
            dataset = make_dataset(f, config.noise.build(), d, config.n, named_stream(seed, "data"))
            if config.mode == FlowMode.JOINT:
                trajectory = run_joint(state_0, dataset, f, flow)
            else:
                trajectory = run_empirical(state_0, dataset, flow, f)
        return TrainResult(config=config, flow=flow, plan=plan, trajectory=trajectory)

    def write(self, result: TrainResult, store: ArtifactStore) -> None:
        """Trajectory, final checkpoint with its sidecar, the effective config and the manifest."""
        config, trajectory = result.config, result.trajectory
        if config.io.format == OutputFormat.JSON:
            store.write_text("trajectory.json", encode_trajectory_json(trajectory))
        else:
            store.write_text("trajectory.csv", encode_trajectory_csv(trajectory))
        store.write_bytes("checkpoint.bin", encode_checkpoint(trajectory.final_state))
        assert config.seed is not None
        store.write_text("checkpoint.json", checkpoint_sidecar(config.seed, trajectory.final.step, trajectory.final.t))
        echo = {
            "config": config.model_dump(),
            "flow": result.flow.model_dump(),
            "plan": None if result.plan is None else result.plan.model_dump(),
        }
        store.write_text("config.json", canonical_echo(echo))
        store.write_manifest("train", echo, [config.seed])


def canonical_echo(payload: dict) -> str:
    """Indented JSON with sorted keys, stable across runs."""
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"

"""Demonstration cast: simulated mobile agent, ground station, monitor,
relay verifier, attacker tooling, and the scenario runner that scripts them
against a live broker."""

from pqc2.agents.model import (
    OMEGA_MAX,
    V_MAX,
    AgentPose,
    VelocityCommand,
    command_payload,
    estop_payload,
    normalize_angle,
    parse_command,
    parse_estop,
    parse_status,
    pose_step,
    status_payload,
    within_limits,
)
from pqc2.agents.runtime import Identity, InboundGuard, Outbound, connect_node
from pqc2.agents.mobile import MobileAgent, MobileConfig
from pqc2.agents.ground import GroundConfig, GroundStation
from pqc2.agents.monitor import Monitor, MonitorConfig
from pqc2.agents.relay import RelayAgent, RelayConfig
from pqc2.agents.attacker import (
    ATTACK_KINDS,
    AttackContext,
    AttackReport,
    run_attack,
)
from pqc2.agents.scenario import (
    ScenarioReport,
    ScenarioSpec,
    bundled_scenario_names,
    load_bundled_scenario,
    provision_identities,
    scenario_load,
    scenario_load_file,
    scenario_run,
)

__all__ = [
    "OMEGA_MAX", "V_MAX", "AgentPose", "VelocityCommand",
    "normalize_angle", "pose_step", "within_limits",
    "command_payload", "parse_command", "estop_payload", "parse_estop",
    "status_payload", "parse_status",
    "Identity", "InboundGuard", "Outbound", "connect_node",
    "MobileAgent", "MobileConfig",
    "GroundConfig", "GroundStation",
    "Monitor", "MonitorConfig",
    "RelayAgent", "RelayConfig",
    "ATTACK_KINDS", "AttackContext", "AttackReport", "run_attack",
    "ScenarioReport", "ScenarioSpec", "bundled_scenario_names",
    "load_bundled_scenario", "provision_identities", "scenario_load",
    "scenario_load_file", "scenario_run",
]

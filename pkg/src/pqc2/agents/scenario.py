"""Scenario runner: scripted multi-agent demonstrations with a verdict.

A scenario is a YAML timeline of actor actions, each with an optional
expectation. The runner provisions a throwaway PKI, starts the broker and
cast over real loopback sockets, executes actions strictly in order (each
action settles on an observable barrier before the next starts), and
produces a JSON-able report stating what happened and whether every
expectation held.
"""

import dataclasses
import importlib.resources
import json
import logging
import os
import secrets
import tempfile
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import yaml

from pqc2 import authz, crypto, pki
from pqc2.bus import Broker, BrokerConfig, protocol
from pqc2.bus.events import EventLog, SecurityEvent, merge_events
from pqc2.errors import NotAuthorized, Pqc2Error, ScenarioSetupFailure
from pqc2.agents import model
from pqc2.agents.attacker import ATTACK_KINDS, AttackContext, AttackReport, run_attack
from pqc2.agents.ground import GroundConfig, GroundStation
from pqc2.agents.mobile import MobileAgent, MobileConfig
from pqc2.agents.monitor import Monitor, MonitorConfig
from pqc2.agents.relay import RelayAgent, RelayConfig
from pqc2.agents.runtime import Identity, connect_node

log = logging.getLogger("pqc2.agents.scenario")

CAST_ROLES = {
    "agent": pki.Role.AGENT,
    "ground_station": pki.Role.GROUND_STATION,
    "monitor": pki.Role.MONITOR,
    "relay": pki.Role.RELAY,
}
IDENTITY_ROLES = dict(CAST_ROLES, attacker=pki.Role.ATTACKER, broker=pki.Role.BROKER)

ACTIONS = ("probe", "command", "estop", "wait", "snapshot", "assert_frozen", "attack")

_KEY_DEPTH = 8  # 256 one-time leaves per identity; plenty for a demo run
_SETTLE_S = 10.0


@dataclass
class ActionSpec:
    at: int
    actor: str
    action: str
    args: dict = field(default_factory=dict)
    expect: Optional[object] = None  # str, or {mode: str} mapping


@dataclass
class ScenarioSpec:
    name: str
    mode: str = protocol.MODE_BOTH
    cast: List[str] = field(default_factory=list)
    capture: bool = False
    authz_text: Optional[str] = None  # None -> bundled demo policy
    timeline: List[ActionSpec] = field(default_factory=list)


@dataclass
class ActionOutcome:
    at: int
    actor: str
    action: str
    outcome: str
    detail: str
    expect: Optional[str]
    ok: bool

    def to_json(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class ScenarioReport:
    name: str
    mode: str
    ok: bool
    actions: List[ActionOutcome]
    final_pose: Optional[dict]
    events: List[SecurityEvent]
    attack_reports: List[AttackReport]
    duration_s: float

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "mode": self.mode,
            "ok": self.ok,
            "actions": [a.to_json() for a in self.actions],
            "final_pose": self.final_pose,
            "events": [json.loads(e.to_json()) for e in self.events],
            "attacks": [r.to_json() for r in self.attack_reports],
            "duration_s": self.duration_s,
        }

    def decision_matrix(self) -> Dict[str, str]:
        """'subject topic op' -> allowed/denied, from the probe actions."""
        out = {}
        for act in self.actions:
            if act.action == "probe":
                key = f"{act.actor} {act.detail}"
                out[key] = act.outcome
        return out


# spec loading

def scenario_load(text: str, name: str = "scenario") -> ScenarioSpec:
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioSetupFailure(f"scenario YAML does not parse: {exc}")
    if not isinstance(doc, dict):
        raise ScenarioSetupFailure("scenario must be a YAML mapping")
    unknown = set(doc) - {"name", "mode", "cast", "capture", "authz", "timeline"}
    if unknown:
        raise ScenarioSetupFailure(f"unknown scenario keys: {sorted(unknown)}")
    spec = ScenarioSpec(
        name=str(doc.get("name", name)),
        mode=protocol.check_mode(doc.get("mode", protocol.MODE_BOTH)),
        cast=list(doc.get("cast", [])),
        capture=bool(doc.get("capture", False)),
        authz_text=doc.get("authz"),
    )
    for member in spec.cast:
        if member not in CAST_ROLES:
            raise ScenarioSetupFailure(f"unknown cast member {member!r}")
    entries = doc.get("timeline", [])
    if not isinstance(entries, list) or not entries:
        raise ScenarioSetupFailure("scenario timeline must be a non-empty list")
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or "actor" not in entry or "action" not in entry:
            raise ScenarioSetupFailure(f"timeline[{i}] needs actor and action")
        if entry["action"] not in ACTIONS:
            raise ScenarioSetupFailure(
                f"timeline[{i}] action {entry['action']!r} not one of {ACTIONS}"
            )
        spec.timeline.append(
            ActionSpec(
                at=int(entry.get("at", i)),
                actor=str(entry["actor"]),
                action=str(entry["action"]),
                args=dict(entry.get("args", {})),
                expect=entry.get("expect"),
            )
        )
    spec.timeline.sort(key=lambda a: a.at)
    return spec


def scenario_load_file(path: str) -> ScenarioSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return scenario_load(fh.read(), name=os.path.splitext(os.path.basename(path))[0])


def bundled_scenario_names() -> List[str]:
    root = importlib.resources.files("pqc2.agents") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def load_bundled_scenario(name: str) -> ScenarioSpec:
    root = importlib.resources.files("pqc2.agents") / "scenarios"
    path = root / f"{name}.yaml"
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ScenarioSetupFailure(
            f"no bundled scenario {name!r}; have {bundled_scenario_names()}"
        )
    return scenario_load(text, name=name)


# identity provisioning

def provision_identities(subjects: Dict[str, pki.Role], depth: int = _KEY_DEPTH,
                         scheme_id: int = 1):
    """Fresh CA plus one certificate per subject; everyone trusts the CA and
    holds the full certificate directory."""
    now = int(time.time())
    ca, ca_cert = pki.create_ca("scenario-ca", scheme_id, depth=depth)
    trust = pki.TrustStore([ca_cert])
    keypairs, certs = {}, {}
    for subject, role in subjects.items():
        kwargs = {"depth": depth} if scheme_id == 1 else {}
        kp = crypto.sig_keygen(scheme_id, **kwargs)
        certs[subject] = pki.issue_certificate(
            ca, subject, role, scheme_id, kp.public_key, (now - 300, now + 6 * 3600)
        )
        keypairs[subject] = kp
    identities = {
        subject: Identity(
            subject=subject, keypair=keypairs[subject], certificate=certs[subject],
            trust_store=trust, peer_certs=dict(certs),
        )
        for subject in subjects
    }
    return identities, trust


# the runner

class _Stage:
    """Live handles for one scenario run."""

    def __init__(self, spec: ScenarioSpec, mode: str, workdir: str):
        self.spec = spec
        self.mode = mode
        self.workdir = workdir
        self.capture_path = os.path.join(workdir, "wire.pqcp") if spec.capture else None
        policy = (authz.demo_policy() if spec.authz_text is None
                  else authz.policy_load(spec.authz_text))
        self.identities, self.trust = provision_identities(IDENTITY_ROLES)
        self.broker = Broker(BrokerConfig(
            policy=policy, mode=mode, trust_store=self.trust,
            certificate=self.identities["broker"].certificate,
            keypair=self.identities["broker"].keypair,
            capture_path=self.capture_path,
        )).start()
        self.agent: Optional[MobileAgent] = None
        self.ground: Optional[GroundStation] = None
        self.monitor: Optional[Monitor] = None
        self.relay: Optional[RelayAgent] = None
        host, port = "127.0.0.1", self.broker.port
        if "agent" in spec.cast:
            self.agent = MobileAgent(MobileConfig(
                identity=self.identities["agent"], host=host, port=port, mode=mode,
            )).start()
        if "ground_station" in spec.cast:
            self.ground = GroundStation(GroundConfig(
                identity=self.identities["ground_station"], host=host, port=port,
                mode=mode,
            )).start()
        if "monitor" in spec.cast:
            self.monitor = Monitor(MonitorConfig(
                identity=self.identities["monitor"], host=host, port=port, mode=mode,
            )).start()
        if "relay" in spec.cast:
            self.relay = RelayAgent(RelayConfig(
                identity=self.identities["relay"], host=host, port=port, mode=mode,
            )).start()
        self.slots: Dict[str, model.AgentPose] = {}
        self.markers: Dict[str, bytes] = {}
        self.sent_wires: List[bytes] = []
        self.attack_reports: List[AttackReport] = []

    def close(self) -> None:
        for part in (self.agent, self.ground, self.monitor, self.relay):
            if part is not None:
                part.stop()
        self.broker.stop()

    def all_events(self) -> List[SecurityEvent]:
        logs = [self.broker.event_log.events()]
        for part in (self.agent, self.ground, self.monitor, self.relay):
            if part is not None:
                logs.append(part.event_log.events())
        return merge_events(*logs)


def _wait_until(pred: Callable[[], bool], timeout: float = _SETTLE_S,
                interval: float = 0.002) -> bool:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        if pred():
            return True
        time.sleep(interval)
    return pred()


def _expected_for(expect, mode: str) -> Optional[str]:
    if expect is None:
        return None
    if isinstance(expect, dict):
        return expect.get(mode, expect.get("*"))
    return str(expect)


def scenario_run(spec: ScenarioSpec, mode: Optional[str] = None,
                 report_path: Optional[str] = None) -> ScenarioReport:
    effective_mode = protocol.check_mode(mode or spec.mode)
    started = time.monotonic()
    workdir = tempfile.mkdtemp(prefix=f"pqc2-{spec.name}-")
    stage = _Stage(spec, effective_mode, workdir)
    outcomes: List[ActionOutcome] = []
    try:
        for action in spec.timeline:
            outcome, detail = _execute(stage, action)
            expected = _expected_for(action.expect, effective_mode)
            outcomes.append(ActionOutcome(
                at=action.at, actor=action.actor, action=action.action,
                outcome=outcome, detail=detail, expect=expected,
                ok=(expected is None or outcome == expected),
            ))
    finally:
        final_pose = None
        if stage.agent is not None:
            snap = stage.agent.snapshot()
            final_pose = {"x": snap.pose.x, "y": snap.pose.y, "theta": snap.pose.theta,
                          "estop": snap.estop, "seq": snap.last_seq}
        events = stage.all_events()
        attack_reports = list(stage.attack_reports)
        stage.close()
    report = ScenarioReport(
        name=spec.name, mode=effective_mode, ok=all(o.ok for o in outcomes),
        actions=outcomes, final_pose=final_pose, events=events,
        attack_reports=attack_reports, duration_s=time.monotonic() - started,
    )
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(report.to_json(), fh, indent=2)
    return report


def _execute(stage: _Stage, action: ActionSpec):
    try:
        handler = _ACTION_HANDLERS[action.action]
    except KeyError:
        raise ScenarioSetupFailure(f"unhandled action {action.action!r}")
    return handler(stage, action)


def _act_probe(stage: _Stage, action: ActionSpec):
    args = action.args
    topic = authz.normalize_topic(str(args["topic"]))
    op = str(args["op"])
    if op not in ("publish", "subscribe"):
        raise ScenarioSetupFailure(f"probe op must be publish|subscribe, got {op!r}")
    identity = stage.identities.get(action.actor)
    if identity is None:
        raise ScenarioSetupFailure(f"no identity provisioned for {action.actor!r}")
    kwargs = {"publishes": [topic]} if op == "publish" else {"subscribes": [topic]}
    detail = f"{topic} {op}"
    try:
        session = connect_node(identity, "127.0.0.1", stage.broker.port,
                               stage.mode, **kwargs)
        session.close()
        return "allowed", detail
    except NotAuthorized:
        return "denied", detail
    except Pqc2Error as exc:
        return f"error:{type(exc).__name__}", f"{detail}: {exc}"


def _act_command(stage: _Stage, action: ActionSpec):
    if stage.ground is None:
        raise ScenarioSetupFailure("command action needs ground_station in the cast")
    args = action.args
    v, omega = float(args.get("v", 0.0)), float(args.get("omega", 0.0))
    extra = None
    marker_slot = args.get("marker")
    if marker_slot:
        marker = secrets.token_hex(32).encode()  # 64 ASCII bytes on the wire
        stage.markers[str(marker_slot)] = marker
        extra = {"note": marker.decode()}
    before = stage.agent.snapshot().accepted_commands if stage.agent else 0
    wire = stage.ground.send_velocity(v, omega, extra)
    stage.sent_wires.append(wire)
    if stage.agent is None:
        return "sent", f"v={v} omega={omega}"
    applied = _wait_until(lambda: stage.agent.snapshot().accepted_commands > before)
    return ("applied" if applied else "dropped"), f"v={v} omega={omega}"


def _act_estop(stage: _Stage, action: ActionSpec):
    engage = bool(action.args.get("engage", True))
    sender = {"monitor": stage.monitor, "ground_station": stage.ground}.get(action.actor)
    if sender is None:
        raise ScenarioSetupFailure(f"e-stop actor {action.actor!r} not in cast")
    wire = sender.send_estop(engage)
    if isinstance(wire, bytes):
        stage.sent_wires.append(wire)
    if stage.agent is None:
        return "sent", f"engage={engage}"
    applied = _wait_until(lambda: stage.agent.snapshot().estop == engage)
    return ("applied" if applied else "dropped"), f"engage={engage}"


def _act_wait(stage: _Stage, action: ActionSpec):
    steps = int(action.args.get("steps", 10))
    if stage.agent is None:
        time.sleep(steps * model.DEFAULT_DT)
        return "ok", f"slept {steps} steps"
    target = stage.agent.snapshot().step_count + steps
    reached = _wait_until(lambda: stage.agent.snapshot().step_count >= target,
                          timeout=steps * stage.agent.config.dt * 20 + 5)
    return ("ok" if reached else "stalled"), f"{steps} steps"


def _act_snapshot(stage: _Stage, action: ActionSpec):
    if stage.agent is None:
        raise ScenarioSetupFailure("snapshot needs the agent in the cast")
    slot = str(action.args.get("slot", "default"))
    stage.slots[slot] = stage.agent.snapshot().pose
    return "ok", f"slot {slot}"


def _act_assert_frozen(stage: _Stage, action: ActionSpec):
    if stage.agent is None:
        raise ScenarioSetupFailure("assert_frozen needs the agent in the cast")
    slot = str(action.args.get("slot", "default"))
    if slot not in stage.slots:
        raise ScenarioSetupFailure(f"no snapshot in slot {slot!r}")
    then = stage.slots[slot]
    now = stage.agent.snapshot().pose
    frozen = (then.x == now.x and then.y == now.y and then.theta == now.theta)
    detail = f"slot {slot}: {then} vs {now}"
    return ("frozen" if frozen else "moved"), detail


def _act_attack(stage: _Stage, action: ActionSpec):
    args = action.args
    kind = str(args.get("kind", ""))
    if kind not in ATTACK_KINDS:
        raise ScenarioSetupFailure(f"attack kind must be one of {ATTACK_KINDS}")
    needle = None
    needle_slot = args.get("needle")
    if needle_slot is not None:
        needle = stage.markers.get(str(needle_slot))
        if needle is None:
            raise ScenarioSetupFailure(f"no marker recorded in slot {needle_slot!r}")
    ctx = AttackContext(
        host="127.0.0.1", port=stage.broker.port, mode=stage.mode,
        identity=stage.identities["attacker"],
        impersonate=str(args.get("impersonate", "ground_station")),
        topic=authz.normalize_topic(str(args.get("topic", "/command"))),
        count=int(args.get("count", 10)),
        captured=list(stage.sent_wires),
        capture_path=stage.capture_path,
        needle=needle,
    )
    before = stage.agent.snapshot().accepted_commands if stage.agent else 0
    report = run_attack(kind, ctx)
    stage.attack_reports.append(report)
    if kind == "eavesdrop":
        return ("recovered" if report.recovered else "not-recovered"), report.notes[-1] if report.notes else ""
    # give in-flight frames a moment to land before judging delivery
    if stage.agent is not None and report.sent:
        _wait_until(lambda: stage.agent.snapshot().accepted_commands > before, timeout=1.0)
    delivered = (stage.agent.snapshot().accepted_commands - before) if stage.agent else 0
    detail = (f"sent={report.sent} refusal={report.refusal!r} "
              f"victim accepted {delivered}")
    return ("delivered" if delivered > 0 else "blocked"), detail


_ACTION_HANDLERS = {
    "probe": _act_probe,
    "command": _act_command,
    "estop": _act_estop,
    "wait": _act_wait,
    "snapshot": _act_snapshot,
    "assert_frozen": _act_assert_frozen,
    "attack": _act_attack,
}

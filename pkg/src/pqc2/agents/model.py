"""Agent domain model: unicycle kinematics and command/status payloads.

The simulated platform integrates velocity commands with explicit Euler at a
fixed step. Payloads are small JSON documents so captures stay readable and
the web console can speak the same dialect.
"""

import json
import math
from dataclasses import dataclass
from typing import Optional

V_MAX = 2.0        # m/s
OMEGA_MAX = 1.5    # rad/s
DEFAULT_DT = 0.01  # s


@dataclass(frozen=True)
class AgentPose:
    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0


@dataclass(frozen=True)
class VelocityCommand:
    v: float
    omega: float


def normalize_angle(theta: float) -> float:
    """Wrap into (-pi, pi]; -pi lands on +pi.

    In-range values pass through untouched: the add/fmod/subtract round trip
    is lossy at the ulp level, and a zero-velocity step must not creep."""
    if -math.pi < theta <= math.pi:
        return theta
    wrapped = math.fmod(theta + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def pose_step(pose: AgentPose, cmd: VelocityCommand, dt: float) -> AgentPose:
    if not (dt > 0.0 and math.isfinite(dt)):
        raise ValueError(f"dt must be a positive finite number, got {dt}")
    for val in (pose.x, pose.y, pose.theta, cmd.v, cmd.omega):
        if not math.isfinite(val):
            raise ValueError("non-finite pose or command")
    return AgentPose(
        x=pose.x + cmd.v * math.cos(pose.theta) * dt,
        y=pose.y + cmd.v * math.sin(pose.theta) * dt,
        theta=normalize_angle(pose.theta + cmd.omega * dt),
    )


def within_limits(cmd: VelocityCommand, v_max: float = V_MAX,
                  omega_max: float = OMEGA_MAX) -> bool:
    """Commands outside the platform envelope are rejected, never clamped."""
    return (
        math.isfinite(cmd.v)
        and math.isfinite(cmd.omega)
        and abs(cmd.v) <= v_max
        and abs(cmd.omega) <= omega_max
    )


# payload codecs: compact JSON on the wire

def command_payload(v: float, omega: float, extra: Optional[dict] = None) -> bytes:
    doc = {"v": v, "omega": omega}
    if extra:
        doc.update(extra)
    return json.dumps(doc, separators=(",", ":")).encode()


def parse_command(payload: bytes) -> VelocityCommand:
    """Structural parse only; range checking is the agent's call."""
    try:
        doc = json.loads(payload.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"command payload is not JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError("command payload must be a JSON object")
    try:
        v, omega = float(doc["v"]), float(doc["omega"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError("command payload needs numeric v and omega") from exc
    return VelocityCommand(v, omega)


def estop_payload(engage: bool) -> bytes:
    return json.dumps({"estop": bool(engage)}, separators=(",", ":")).encode()


def parse_estop(payload: bytes) -> bool:
    try:
        doc = json.loads(payload.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"e-stop payload is not JSON: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("estop"), bool):
        raise ValueError("e-stop payload needs a boolean 'estop' field")
    return doc["estop"]


def status_payload(pose: AgentPose, estop: bool, seq: int) -> bytes:
    doc = {"x": pose.x, "y": pose.y, "theta": pose.theta,
           "estop": bool(estop), "seq": int(seq)}
    return json.dumps(doc, separators=(",", ":")).encode()


def parse_status(payload: bytes) -> dict:
    try:
        doc = json.loads(payload.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ValueError(f"status payload is not JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError("status payload must be a JSON object")
    for key in ("x", "y", "theta"):
        if not isinstance(doc.get(key), (int, float)):
            raise ValueError(f"status field {key!r} missing or non-numeric")
    if not isinstance(doc.get("estop"), bool) or not isinstance(doc.get("seq"), int):
        raise ValueError("status needs boolean 'estop' and integer 'seq'")
    return doc

"""Simulated mobile agent: executes velocity commands, honors the e-stop
latch, and publishes status.

One control loop does everything (drain inboxes, integrate, publish) at a
fixed step, so the pose trajectory is a pure function of the accepted
commands and the step schedule. The loop records every effective-velocity
change with its step index; replaying that trace through pose_step must land
on the final pose bit for bit.
"""

import logging
import threading
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from pqc2 import channel
from pqc2.bus.events import EventLog
from pqc2.errors import ConnectionLost
from pqc2.agents import model
from pqc2.agents.runtime import Identity, InboundGuard, Outbound, connect_node

log = logging.getLogger("pqc2.agents.mobile")

COMMAND_TOPIC = "/command"
ESTOP_TOPIC = "/e-stop"
STATUS_TOPIC = "/status"


@dataclass
class MobileConfig:
    identity: Identity
    host: str
    port: int
    mode: str = "none"
    dt: float = model.DEFAULT_DT
    status_hz: float = 20.0
    v_max: float = model.V_MAX
    omega_max: float = model.OMEGA_MAX
    # commands stop being obeyed this long after the last accepted one
    hold_ms: int = 500
    command_topic: str = COMMAND_TOPIC
    estop_topic: str = ESTOP_TOPIC
    status_topic: str = STATUS_TOPIC
    channel_config: Optional[channel.ChannelConfig] = None
    event_log: Optional[EventLog] = None
    realtime: bool = True  # False: free-run the loop as fast as it goes


@dataclass
class AgentSnapshot:
    pose: model.AgentPose
    estop: bool
    step_count: int
    last_seq: int
    accepted_commands: int
    rejected_invalid: int


class MobileAgent:
    def __init__(self, config: MobileConfig):
        self.config = config
        self.event_log = config.event_log if config.event_log is not None else EventLog()
        self._guard = InboundGuard(config.identity, config.mode, self.event_log)
        self._outbound = Outbound(config.identity, config.mode)
        self._session = None
        self._thread: Optional[threading.Thread] = None
        self._stop = threading.Event()
        self._lock = threading.Lock()

        self.pose = model.AgentPose()
        self.estop = False
        self.step_count = 0
        self.last_seq = 0
        self.accepted: List[Tuple[str, int, str]] = []  # (sender, seq, kind)
        self.rejected_invalid = 0
        # (step index, v, omega) at every effective-velocity change
        self.trace: List[Tuple[int, float, float]] = []

        self._target = (0.0, 0.0)
        self._current = (0.0, 0.0)
        self._last_cmd_ms: Optional[float] = None
        status_every = 1.0 / (config.dt * config.status_hz)
        self._status_every = max(1, round(status_every))

    # lifecycle

    def start(self) -> "MobileAgent":
        self._session = connect_node(
            self.config.identity, self.config.host, self.config.port, self.config.mode,
            publishes=[self.config.status_topic],
            subscribes=[self.config.command_topic, self.config.estop_topic],
            channel_config=self.config.channel_config,
        )
        self._thread = threading.Thread(target=self._run, name="mobile-agent", daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=10)
        if self._session is not None:
            self._session.close()

    def __enter__(self) -> "MobileAgent":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()

    @property
    def alive(self) -> bool:
        return self._thread is not None and self._thread.is_alive()

    def snapshot(self) -> AgentSnapshot:
        with self._lock:
            return AgentSnapshot(
                pose=self.pose, estop=self.estop, step_count=self.step_count,
                last_seq=self.last_seq, accepted_commands=len(self.accepted),
                rejected_invalid=self.rejected_invalid,
            )

    def replay_pose(self) -> model.AgentPose:
        """Re-integrate the recorded trace; must equal self.pose exactly."""
        with self._lock:
            trace = list(self.trace)
            steps = self.step_count
        pose = model.AgentPose()
        v, omega = 0.0, 0.0
        next_change = 0
        for step in range(steps):
            while next_change < len(trace) and trace[next_change][0] == step:
                _, v, omega = trace[next_change]
                next_change += 1
            pose = model.pose_step(pose, model.VelocityCommand(v, omega), self.config.dt)
        return pose

    # control loop

    def _run(self) -> None:
        dt = self.config.dt
        next_tick = time.monotonic()
        while not self._stop.is_set():
            try:
                self._drain_inboxes()
            except ConnectionLost:
                log.info("agent link lost; stopping loop")
                return
            with self._lock:
                self._step_locked()
            if self.step_count % self._status_every == 0:
                try:
                    self._publish_status()
                except ConnectionLost:
                    return
            if self.config.realtime:
                next_tick += dt
                delay = next_tick - time.monotonic()
                if delay > 0:
                    time.sleep(delay)
                else:
                    next_tick = time.monotonic()  # fell behind; do not burst

    def _step_locked(self) -> None:
        now_ms = time.monotonic() * 1000.0
        if self.estop:
            effective = (0.0, 0.0)
        elif self._last_cmd_ms is None or now_ms - self._last_cmd_ms > self.config.hold_ms:
            effective = (0.0, 0.0)
        else:
            effective = self._target
        if effective != self._current:
            self.trace.append((self.step_count, effective[0], effective[1]))
            self._current = effective
        self.pose = model.pose_step(
            self.pose, model.VelocityCommand(*self._current), self.config.dt
        )
        self.step_count += 1

    def _drain_inboxes(self) -> None:
        while True:
            wire = self._session.poll(self.config.command_topic)
            if wire is None:
                break
            self._handle_command(wire)
        while True:
            wire = self._session.poll(self.config.estop_topic)
            if wire is None:
                break
            self._handle_estop(wire)

    def _handle_command(self, wire: bytes) -> None:
        env = self._guard.open(wire, self.config.command_topic)
        if env is None:
            return
        try:
            cmd = model.parse_command(env.payload)
        except ValueError as exc:
            with self._lock:
                self.rejected_invalid += 1
            log.warning("unparseable command from %s: %s", env.sender, exc)
            return
        if not model.within_limits(cmd, self.config.v_max, self.config.omega_max):
            with self._lock:
                self.rejected_invalid += 1
            log.warning("command outside limits rejected: v=%s omega=%s", cmd.v, cmd.omega)
            return
        with self._lock:
            self._target = (cmd.v, cmd.omega)
            self._last_cmd_ms = time.monotonic() * 1000.0
            self.last_seq = env.seq
            self.accepted.append((env.sender, env.seq, "command"))

    def _handle_estop(self, wire: bytes) -> None:
        env = self._guard.open(wire, self.config.estop_topic)
        if env is None:
            return
        try:
            engage = model.parse_estop(env.payload)
        except ValueError as exc:
            with self._lock:
                self.rejected_invalid += 1
            log.warning("unparseable e-stop from %s: %s", env.sender, exc)
            return
        with self._lock:
            if engage:
                self.estop = True
                self._target = (0.0, 0.0)  # do not resume old velocity on release
                self._last_cmd_ms = None
            else:
                self.estop = False
            self.last_seq = env.seq
            self.accepted.append((env.sender, env.seq, "estop"))

    def _publish_status(self) -> None:
        with self._lock:
            payload = model.status_payload(self.pose, self.estop, self.last_seq)
        wire = self._outbound.seal(self.config.status_topic, payload)
        self._session.publish(self.config.status_topic, wire)

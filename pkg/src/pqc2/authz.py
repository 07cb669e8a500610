"""Topic-level authorization: who may publish and who may subscribe.

Policy lives in a YAML file mapping topics to publisher/subscriber subject
lists; everything not explicitly granted is denied.  Principals are
certificate subjects, so authorization binds to authenticated identity.
Topics match exactly (no wildcards) and are normalized to a leading "/".

The demo policy grants the ground station full control, lets the monitor
raise (but not hear) emergency stops, and gives the agent only what it
needs to act and report.  The attacker appears nowhere, so every attacker
action falls through to default-deny.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, FrozenSet, Union

import yaml

from pqc2.errors import DuplicateTopic, ParseError


class Action(enum.Enum):
    PUBLISH = "publish"
    SUBSCRIBE = "subscribe"


@dataclass(frozen=True)
class TopicRule:
    publishers: FrozenSet[str]
    subscribers: FrozenSet[str]


@dataclass(frozen=True)
class Decision:
    allow: bool
    reason: str

    def __bool__(self) -> bool:
        return self.allow


DEFAULT_DENY = "default-deny"

DEMO_POLICY_TEXT = """\
topics:
  /command:  {publish: [ground_station], subscribe: [ground_station, agent]}
  /e-stop:   {publish: [ground_station, monitor], subscribe: [ground_station, agent]}
  /status:   {publish: [ground_station, monitor, agent], subscribe: [ground_station, monitor]}
"""


class AuthzPolicy:
    def __init__(self, topics: Dict[str, TopicRule]):
        self.topics = dict(topics)

    def rule_for(self, topic: str) -> TopicRule:
        return self.topics.get(normalize_topic(topic), _EMPTY_RULE)


_EMPTY_RULE = TopicRule(frozenset(), frozenset())


def normalize_topic(topic: str) -> str:
    topic = str(topic).strip()
    return topic if topic.startswith("/") else "/" + topic


class _StrictLoader(yaml.SafeLoader):
    """SafeLoader that refuses duplicate mapping keys instead of silently
    keeping the last one. A second '/command' block must be an error, not a
    silent policy override."""

    def construct_mapping(self, node, deep=False):
        seen = set()
        for key_node, _ in node.value:
            key = self.construct_object(key_node, deep=deep)
            if key in seen:
                raise DuplicateTopic(str(key))
            seen.add(key)
        return super().construct_mapping(node, deep=deep)


def _subject_set(section, topic: str, action: str) -> FrozenSet[str]:
    if section is None:
        return frozenset()
    if not isinstance(section, list) or not all(isinstance(s, str) for s in section):
        raise ParseError(f"{topic}: {action} must be a list of subjects")
    return frozenset(section)


def policy_load(text: str) -> AuthzPolicy:
    try:
        doc = yaml.load(text, Loader=_StrictLoader)
    except DuplicateTopic:
        raise
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ParseError(f"bad policy YAML: {exc.problem}", line) from exc
    except yaml.YAMLError as exc:
        raise ParseError(f"bad policy YAML: {exc}") from exc

    if doc is None:
        return AuthzPolicy({})
    if not isinstance(doc, dict):
        raise ParseError("policy document must be a mapping")
    unknown = set(doc) - {"topics"}
    if unknown:
        raise ParseError(f"unknown top-level keys: {sorted(unknown)}")

    topics: Dict[str, TopicRule] = {}
    for raw_topic, body in (doc.get("topics") or {}).items():
        topic = normalize_topic(raw_topic)
        if topic in topics:
            # distinct spellings ("command" vs "/command") of the same topic
            raise DuplicateTopic(topic)
        if body is None:
            body = {}
        if not isinstance(body, dict):
            raise ParseError(f"{topic}: entry must be a mapping")
        unknown = set(body) - {"publish", "subscribe"}
        if unknown:
            raise ParseError(f"{topic}: unknown keys {sorted(unknown)}")
        topics[topic] = TopicRule(
            publishers=_subject_set(body.get("publish"), topic, "publish"),
            subscribers=_subject_set(body.get("subscribe"), topic, "subscribe"),
        )
    return AuthzPolicy(topics)


def policy_load_file(path: Union[str, Path]) -> AuthzPolicy:
    return policy_load(Path(path).read_text())


def demo_policy() -> AuthzPolicy:
    return policy_load(DEMO_POLICY_TEXT)


def check(policy: AuthzPolicy, principal: str, topic: str,
          action: Union[Action, str]) -> Decision:
    action = Action(action)
    topic = normalize_topic(topic)
    rule = policy.rule_for(topic)
    subjects = rule.publishers if action is Action.PUBLISH else rule.subscribers
    if principal in subjects:
        return Decision(True, f"{topic}:{action.value} grants {principal}")
    return Decision(False, DEFAULT_DENY)

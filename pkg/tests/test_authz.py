"""Authorization policy loading and the full demo decision matrix."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pqc2 import authz
from pqc2.errors import DuplicateTopic, ParseError

# expected decision matrix for the three demo principals: (publish, subscribe)
MATRIX = {
    ("ground_station", "/command"): (True, True),
    ("monitor", "/command"): (False, False),
    ("attacker", "/command"): (False, False),
    ("ground_station", "/e-stop"): (True, True),
    ("monitor", "/e-stop"): (True, False),
    ("attacker", "/e-stop"): (False, False),
    ("ground_station", "/status"): (True, True),
    ("monitor", "/status"): (True, True),
    ("attacker", "/status"): (False, False),
}


@pytest.fixture(scope="module")
def policy():
    return authz.demo_policy()


class TestDemoMatrix:
    @pytest.mark.parametrize("principal,topic", sorted(MATRIX))
    def test_cell(self, policy, principal, topic):
        want_pub, want_sub = MATRIX[(principal, topic)]
        assert authz.check(policy, principal, topic, "publish").allow == want_pub
        assert authz.check(policy, principal, topic, "subscribe").allow == want_sub

    def test_command_publishers(self, policy):
        assert policy.rule_for("/command").publishers == {"ground_station"}

    def test_agent_extension(self, policy):
        # the agent needs to hear commands and report status
        assert authz.check(policy, "agent", "/command", "subscribe").allow
        assert authz.check(policy, "agent", "/e-stop", "subscribe").allow
        assert authz.check(policy, "agent", "/status", "publish").allow
        assert not authz.check(policy, "agent", "/command", "publish").allow
        assert not authz.check(policy, "agent", "/status", "subscribe").allow


class TestLoad:
    def test_empty_document_denies_everything(self):
        policy = authz.policy_load("")
        for action in ("publish", "subscribe"):
            decision = authz.check(policy, "anyone", "/anything", action)
            assert not decision.allow
            assert decision.reason == authz.DEFAULT_DENY

    def test_unlisted_topic_denied(self, policy):
        assert not authz.check(policy, "ground_station", "/unlisted", "publish").allow

    def test_duplicate_topic_blocks(self):
        text = (
            "topics:\n"
            "  /command: {publish: [a]}\n"
            "  /command: {publish: [b]}\n"
        )
        with pytest.raises(DuplicateTopic):
            authz.policy_load(text)

    def test_duplicate_after_normalization(self):
        text = (
            "topics:\n"
            "  /command: {publish: [a]}\n"
            "  command: {publish: [b]}\n"
        )
        with pytest.raises(DuplicateTopic):
            authz.policy_load(text)

    def test_topic_normalization(self):
        policy = authz.policy_load("topics:\n  command: {publish: [gs]}\n")
        assert authz.check(policy, "gs", "/command", "publish").allow
        assert authz.check(policy, "gs", "command", "publish").allow

    def test_missing_sections_are_empty(self):
        policy = authz.policy_load("topics:\n  /command: {publish: [gs]}\n")
        assert policy.rule_for("/command").subscribers == frozenset()
        policy = authz.policy_load("topics:\n  /command:\n")
        assert policy.rule_for("/command").publishers == frozenset()

    def test_parse_error_carries_line(self):
        with pytest.raises(ParseError) as exc:
            authz.policy_load("topics:\n  /a: {publish: [x]\n")
        assert exc.value.line is not None

    def test_rejects_non_list_subjects(self):
        with pytest.raises(ParseError):
            authz.policy_load("topics:\n  /a: {publish: gs}\n")

    def test_rejects_unknown_keys(self):
        with pytest.raises(ParseError):
            authz.policy_load("topics:\n  /a: {publsh: [gs]}\n")
        with pytest.raises(ParseError):
            authz.policy_load("tpics:\n  /a: {publish: [gs]}\n")

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "authz.yaml"
        path.write_text(authz.DEMO_POLICY_TEXT)
        policy = authz.policy_load_file(path)
        assert authz.check(policy, "monitor", "/e-stop", "publish").allow


class TestDecisionSemantics:
    def test_reasons_are_nonempty(self, policy):
        for (principal, topic), _ in MATRIX.items():
            for action in ("publish", "subscribe"):
                decision = authz.check(policy, principal, topic, action)
                assert decision.reason

    def test_check_is_pure(self, policy):
        a = authz.check(policy, "monitor", "/e-stop", "publish")
        b = authz.check(policy, "monitor", "/e-stop", "publish")
        assert a == b

    def test_bad_action_rejected(self, policy):
        with pytest.raises(ValueError):
            authz.check(policy, "gs", "/command", "read")

    @given(
        subject=st.sampled_from(["ground_station", "monitor", "agent", "attacker"]),
        topic=st.sampled_from(["/command", "/e-stop", "/status"]),
        action=st.sampled_from(["publish", "subscribe"]),
    )
    def test_removal_monotonicity(self, subject, topic, action):
        """Removing a subject from every rule never flips a Deny to Allow."""
        base = authz.demo_policy()
        shrunk = authz.AuthzPolicy(
            {
                name: authz.TopicRule(
                    publishers=rule.publishers - {subject},
                    subscribers=rule.subscribers - {subject},
                )
                for name, rule in base.topics.items()
            }
        )
        for who in ("ground_station", "monitor", "agent", "attacker"):
            before = authz.check(base, who, topic, action)
            after = authz.check(shrunk, who, topic, action)
            if not before.allow:
                assert not after.allow

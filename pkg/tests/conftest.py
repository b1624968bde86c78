import json

import pytest

from keetchi import DataMessage, FeedbackMessage, Valence, parse_name


def data(name, created_at=0.0, origin=9, msg_id=None, validity=3600.0, hop_count=0, size=100):
    name = parse_name(name)
    return DataMessage(msg_id or f"{origin}:{name}", name, origin, created_at, size, hop_count,
                       validity)


def feedback(target, valence=Valence.POSITIVE, origin=9, msg_id="9:fb", created_at=0.0,
             hop_count=0, hop_limit=2):
    return FeedbackMessage(msg_id, parse_name(target), valence, origin, created_at, hop_count,
                           hop_limit)


@pytest.fixture
def write_scenario(tmp_path):
    """Write a scenario dict (and optional trace text) to disk; returns the config path."""
    def _write(cfg, trace=None, name="scenario.json"):
        if trace is not None:
            (tmp_path / "contacts.trace").write_text(trace)
            cfg = dict(cfg, mobility={"model": "trace", "trace": "contacts.trace"})
        path = tmp_path / name
        path.write_text(json.dumps(cfg))
        return path
    return _write


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for line in results:
            terminalreporter.write_line(line)

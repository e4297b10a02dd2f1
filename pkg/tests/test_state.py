import sqlite3

import pytest

from hybrid_sac import state
from hybrid_sac.state import (
    add_event,
    get_counters,
    get_events,
    get_health_snapshot,
    get_runs,
    increment_counter,
    record_run,
)


class _FlakyConnection:
    def __init__(self, conn: sqlite3.Connection) -> None:
        self._conn = conn
        self.calls = 0

    def execute(self, sql: str, params=()):
        if self.calls == 0:
            self.calls += 1
            raise sqlite3.OperationalError("database is locked")
        return self._conn.execute(sql, params)


def test_execute_retries_on_locked():
    state._ensure_initialised()
    with state._connection() as conn:
        flaky_conn = _FlakyConnection(conn)
        cursor = state._execute(flaky_conn, "SELECT 1")
        assert cursor.fetchone()[0] == 1
        assert flaky_conn.calls == 1


def test_health_snapshot_ok_state():
    # journal is reset by the autouse fixture in conftest
    snapshot = get_health_snapshot()

    assert snapshot["healthy"] is True
    assert snapshot["status"] == "ok"
    assert snapshot["events"]["total"] == len(get_events())
    assert snapshot["events"]["last_error"] is None
    assert snapshot["events"]["last_warning"] is None
    assert snapshot["runs"]["total"] == 0
    assert snapshot["runs"]["last_run"] is None
    assert snapshot["counters"] == get_counters()
    assert set(state.DEFAULT_COUNTERS) <= set(snapshot["counters"])


def test_health_snapshot_with_warning_then_error():
    add_event("cell failed", "warning")
    snapshot = get_health_snapshot()
    assert snapshot["status"] == "warning"
    assert snapshot["healthy"] is False
    assert snapshot["events"]["last_warning"]["message"] == "cell failed"

    add_event("train failed", "error")
    snapshot = get_health_snapshot()
    assert snapshot["status"] == "error"
    assert snapshot["events"]["last_error"]["message"] == "train failed"
    assert snapshot["events"]["last_warning"]["message"] == "cell failed"


def test_record_run_moves_status_in_place():
    record_run("train-abc-s0", "train", "abc", 0, "started")
    assert [r["run_id"] for r in get_health_snapshot()["runs"]["active"]] == ["train-abc-s0"]

    record_run("train-abc-s0", "train", "abc", 0, "finished")
    runs = get_runs()
    assert len(runs) == 1
    assert runs[0]["status"] == "finished"
    assert get_health_snapshot()["runs"]["active"] == []


def test_unknown_level_and_status_are_rejected():
    with pytest.raises(ValueError):
        add_event("x", "fatal")
    with pytest.raises(ValueError):
        record_run("r", "train", "abc", 0, "paused")


def test_counters_accumulate_and_events_are_trimmed():
    increment_counter("checkpoints")
    increment_counter("checkpoints", 2)
    assert get_counters()["checkpoints"] == 3

    for i in range(state.MAX_EVENT_ENTRIES + 5):
        add_event(f"event {i}")
    events = get_events()
    assert len(events) == state.MAX_EVENT_ENTRIES
    assert events[0]["message"] == f"event {state.MAX_EVENT_ENTRIES + 4}"

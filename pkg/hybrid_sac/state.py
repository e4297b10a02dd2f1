"""Run journal shared by every process of an experiment.

Seed fan-out and parallel sweep cells run in separate worker processes, so
counters, milestone events and run records live in a small SQLite database
rather than in memory. Nothing read from here ever feeds a computed
artifact; the journal only describes what happened.
"""

from __future__ import annotations

import os
import sqlite3
import threading
import time
from collections.abc import Iterator
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

MAX_EVENT_ENTRIES = 200
MAX_RUN_ENTRIES = 100

LEVELS = ("info", "success", "warning", "error")
RUN_STATUSES = ("started", "finished", "failed")
DEFAULT_COUNTERS = ("runs_started", "runs_finished", "runs_failed", "checkpoints", "sweep_failures")

_DB_PATH = Path(os.environ.get("HSAC_STATE_DB_PATH") or Path(__file__).resolve().parents[1] / "hsac-state.sqlite3")

_SCHEMA = (
    "CREATE TABLE IF NOT EXISTS counters (key TEXT PRIMARY KEY, value INTEGER NOT NULL)",
    """
    CREATE TABLE IF NOT EXISTS events (
        id INTEGER PRIMARY KEY AUTOINCREMENT,
        ts TEXT NOT NULL,
        ts_epoch INTEGER NOT NULL,
        level TEXT NOT NULL,
        message TEXT NOT NULL
    )
    """,
    """
    CREATE TABLE IF NOT EXISTS runs (
        id INTEGER PRIMARY KEY AUTOINCREMENT,
        run_id TEXT NOT NULL UNIQUE,
        ts TEXT NOT NULL,
        ts_epoch INTEGER NOT NULL,
        command TEXT NOT NULL,
        digest TEXT NOT NULL,
        seed INTEGER,
        status TEXT NOT NULL
    )
    """,
    "CREATE TABLE IF NOT EXISTS meta (key TEXT PRIMARY KEY, value TEXT)",
)
_EVENT_COLUMNS = "ts, ts_epoch, level, message"
_RUN_COLUMNS = "run_id, ts, ts_epoch, command, digest, seed, status"

_INIT_LOCK = threading.Lock()
_INITIALISED = False


def _stamp() -> Dict[str, Any]:
    now = datetime.now(timezone.utc)
    return {"ts": now.isoformat(), "ts_epoch": int(now.timestamp())}


@contextmanager
def _connection() -> Iterator[sqlite3.Connection]:
    conn = sqlite3.connect(_DB_PATH, timeout=30, check_same_thread=False)
    conn.row_factory = sqlite3.Row
    # seed workers append while the parent process reads
    conn.execute("PRAGMA journal_mode=WAL")
    conn.execute("PRAGMA busy_timeout = 30000")
    try:
        yield conn
        conn.commit()
    finally:
        conn.close()


def _execute(
    conn: sqlite3.Connection,
    sql: str,
    params: tuple[Any, ...] = (),
    *,
    retries: int = 5,
    base_delay: float = 0.1,
) -> sqlite3.Cursor:
    """Run one statement, backing off exponentially while another process holds the lock.

    The busy timeout absorbs ordinary contention; a lock can still outlive it
    on slow or networked filesystems.
    """
    for attempt in range(retries + 1):
        try:
            return conn.execute(sql, params)
        except sqlite3.OperationalError as exc:
            if "database is locked" not in str(exc).lower() or attempt == retries:
                raise
            time.sleep(base_delay * (2**attempt))
    raise AssertionError("unreachable")


def _ensure_initialised() -> None:
    global _INITIALISED
    if _INITIALISED:
        return
    with _INIT_LOCK:
        if _INITIALISED:
            return
        _DB_PATH.parent.mkdir(parents=True, exist_ok=True)
        with _connection() as conn:
            for statement in _SCHEMA:
                _execute(conn, statement)
            _execute(conn, "INSERT OR IGNORE INTO meta(key, value) VALUES('start_ts', ?)", (str(time.time()),))
        _INITIALISED = True


@contextmanager
def _journal() -> Iterator[sqlite3.Connection]:
    _ensure_initialised()
    with _connection() as conn:
        yield conn


def _query(sql: str, params: tuple[Any, ...] = ()) -> list[Dict[str, Any]]:
    with _journal() as conn:
        return [dict(row) for row in _execute(conn, sql, params).fetchall()]


def _write(sql: str, params: tuple[Any, ...] = (), *, trim: Optional[tuple[str, int]] = None) -> None:
    """One statement, optionally followed by dropping all but the newest rows of a table."""
    with _journal() as conn:
        _execute(conn, sql, params)
        if trim is not None:
            table, keep = trim
            _execute(conn, f"DELETE FROM {table} WHERE id NOT IN (SELECT id FROM {table} ORDER BY id DESC LIMIT ?)", (keep,))


def reset_state() -> None:
    """Empty the journal and restart its clock. Meant for tests."""
    with _journal() as conn:
        for table in ("counters", "events", "runs"):
            _execute(conn, f"DELETE FROM {table}")
        _execute(conn, "INSERT OR REPLACE INTO meta(key, value) VALUES('start_ts', ?)", (str(time.time()),))


def add_event(message: str, level: str = "info") -> Dict[str, Any]:
    if level not in LEVELS:
        raise ValueError(f"unknown event level '{level}'")
    event = {**_stamp(), "level": level, "message": message}
    _write(
        f"INSERT INTO events ({_EVENT_COLUMNS}) VALUES (?, ?, ?, ?)",
        tuple(event.values()),
        trim=("events", MAX_EVENT_ENTRIES),
    )
    return event


def record_run(run_id: str, command: str, digest: str, seed: Optional[int], status: str = "started") -> Dict[str, Any]:
    """Insert a run or move an existing one to a new status."""
    if status not in RUN_STATUSES:
        raise ValueError(f"unknown run status '{status}'")
    run = {"run_id": run_id, **_stamp(), "command": command, "digest": digest, "seed": seed, "status": status}
    _write(
        f"""
        INSERT INTO runs ({_RUN_COLUMNS}) VALUES (?, ?, ?, ?, ?, ?, ?)
        ON CONFLICT(run_id) DO UPDATE SET
            ts = excluded.ts, ts_epoch = excluded.ts_epoch, status = excluded.status
        """,
        tuple(run.values()),
        trim=("runs", MAX_RUN_ENTRIES),
    )
    return run


def increment_counter(name: str, amount: int = 1) -> None:
    _write(
        "INSERT INTO counters(key, value) VALUES(?, ?) ON CONFLICT(key) DO UPDATE SET value = value + ?",
        (name, amount, amount),
    )


def get_counters() -> Dict[str, int]:
    counters = {name: 0 for name in DEFAULT_COUNTERS}
    counters.update({row["key"]: row["value"] for row in _query("SELECT key, value FROM counters")})
    return counters


def get_events(limit: int = MAX_EVENT_ENTRIES) -> list[Dict[str, Any]]:
    return _query(f"SELECT {_EVENT_COLUMNS} FROM events ORDER BY id DESC LIMIT ?", (limit,))


def get_runs(limit: int = MAX_RUN_ENTRIES) -> list[Dict[str, Any]]:
    return _query(f"SELECT {_RUN_COLUMNS} FROM runs ORDER BY id DESC LIMIT ?", (limit,))


def last_event(level: str) -> Optional[Dict[str, Any]]:
    rows = _query(f"SELECT {_EVENT_COLUMNS} FROM events WHERE level = ? ORDER BY id DESC LIMIT 1", (level,))
    return rows[0] if rows else None


def active_runs() -> list[Dict[str, Any]]:
    """Runs still marked ``started``; after a crash these are the ones that never finished."""
    return _query(f"SELECT {_RUN_COLUMNS} FROM runs WHERE status = 'started' ORDER BY id DESC")


def journal_started_at() -> float:
    rows = _query("SELECT value FROM meta WHERE key = 'start_ts'")
    try:
        return float(rows[0]["value"])
    except (IndexError, TypeError, ValueError):
        return time.time()


def get_health_snapshot() -> Dict[str, Any]:
    """Structured view over the journal, as rendered by ``status``."""
    last_error = last_event("error")
    last_warning = last_event("warning")
    status = "error" if last_error else "warning" if last_warning else "ok"
    totals = _query("SELECT (SELECT COUNT(*) FROM events) AS events, (SELECT COUNT(*) FROM runs) AS runs")[0]
    recent = get_runs(limit=1)
    return {
        "healthy": status == "ok",
        "status": status,
        "started_at": journal_started_at(),
        "counters": get_counters(),
        "events": {"total": totals["events"], "last_error": last_error, "last_warning": last_warning},
        "runs": {"total": totals["runs"], "last_run": recent[0] if recent else None, "active": active_runs()},
    }


_ensure_initialised()

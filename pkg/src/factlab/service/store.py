"""Embedded persistence: append-only JSON log with periodic snapshots.

Every write appends one line to ``log.jsonl`` and updates the in-memory
tables; every ``snapshot_every`` writes the full table set is rewritten to
``snapshot.json`` and the log truncated. Opening a store replays the
snapshot and then the log tail, so a crash between writes loses nothing
that was appended. Writers are serialized by a lock; reads are plain dict
lookups on the latest in-memory state.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Any


class JsonLogStore:
    def __init__(self, directory, snapshot_every: int = 200):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.snapshot_path = self.directory / "snapshot.json"
        self.log_path = self.directory / "log.jsonl"
        self.snapshot_every = snapshot_every
        self._lock = threading.Lock()
        self._tables: dict[str, dict[str, Any]] = {}
        self._writes_since_snapshot = 0
        self._load()

    def _load(self) -> None:
        if self.snapshot_path.exists():
            with self.snapshot_path.open("r", encoding="utf-8") as fh:
                self._tables = json.load(fh)
        if self.log_path.exists():
            with self.log_path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    event = json.loads(line)
                    table = self._tables.setdefault(event["table"], {})
                    if event.get("deleted"):
                        table.pop(event["id"], None)
                    else:
                        table[event["id"]] = event["record"]
                    self._writes_since_snapshot += 1

    def put(self, table: str, record_id: str, record: dict[str, Any]) -> None:
        with self._lock:
            event = {"table": table, "id": record_id, "record": record}
            with self.log_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, ensure_ascii=False) + "\n")
            self._tables.setdefault(table, {})[record_id] = record
            self._writes_since_snapshot += 1
            if self._writes_since_snapshot >= self.snapshot_every:
                self._snapshot_locked()

    def get(self, table: str, record_id: str) -> dict[str, Any] | None:
        record = self._tables.get(table, {}).get(record_id)
        return json.loads(json.dumps(record)) if record is not None else None

    def all(self, table: str) -> list[dict[str, Any]]:
        records = list(self._tables.get(table, {}).values())
        return json.loads(json.dumps(records))

    def snapshot(self) -> None:
        with self._lock:
            self._snapshot_locked()

    def _snapshot_locked(self) -> None:
        tmp = self.snapshot_path.with_suffix(".json.tmp")
        with tmp.open("w", encoding="utf-8") as fh:
            json.dump(self._tables, fh, ensure_ascii=False)
        tmp.replace(self.snapshot_path)
        self.log_path.write_text("", encoding="utf-8")
        self._writes_since_snapshot = 0

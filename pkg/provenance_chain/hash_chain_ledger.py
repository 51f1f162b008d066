import hashlib
import json
import os
import threading
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

GENESIS_HASH = "0" * 64
LEDGER_NAME = "run_ledger.json"


def file_digest(path: Union[str, Path]) -> str:
    """SHA256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


class RunLedger:
    """
    Hash chain over the artifacts one run emits. Each entry records the
    artifact's own digest and the hash of the previous entry, so editing any
    CSV or reordering the chain is detected by verify_chain_integrity.
    """

    def __init__(self, out_dir: Union[str, Path], ledger_name: str = LEDGER_NAME):
        self.out_dir = Path(out_dir)
        self.ledger_file = self.out_dir / ledger_name
        self.lock = threading.Lock()
        self._ensure_ledger_exists()

    @classmethod
    def fresh(cls, out_dir: Union[str, Path], ledger_name: str = LEDGER_NAME) -> "RunLedger":
        """New chain for a rerun into the same directory; the old ledger is dropped."""
        stale = Path(out_dir) / ledger_name
        if stale.exists():
            stale.unlink()
        return cls(out_dir, ledger_name)

    def _ensure_ledger_exists(self):
        if not self.ledger_file.exists():
            self.out_dir.mkdir(parents=True, exist_ok=True)
            genesis_entry = {
                "index": 0,
                "timestamp": datetime.now(timezone.utc).isoformat(),
                "event_hash": "genesis",
                "prev_hash": GENESIS_HASH,
                "artifact": None,
            }
            self._save_ledger([genesis_entry])

    def _load_ledger(self) -> List[Dict[str, Any]]:
        with open(self.ledger_file, "r", encoding="utf-8") as f:
            return json.load(f)

    def _save_ledger(self, ledger: List[Dict[str, Any]]):
        tmp = self.ledger_file.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(ledger, f, indent=2)
        os.replace(tmp, self.ledger_file)

    @staticmethod
    def _compute_event_hash(artifact: Dict[str, Any], prev_hash: str) -> str:
        canonical_json = json.dumps({"artifact": artifact, "prev_hash": prev_hash}, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical_json.encode()).hexdigest()

    def append_artifact(self, path: Union[str, Path], kind: str) -> int:
        """Record an emitted file and return its ledger index."""
        path = Path(path)
        artifact = {
            "path": path.name if path.parent == self.out_dir else str(path),
            "kind": kind,
            "sha256": file_digest(path),
            "bytes": path.stat().st_size,
        }
        with self.lock:
            ledger = self._load_ledger()
            prev_hash = ledger[-1]["event_hash"]
            entry = {
                "index": len(ledger),
                "timestamp": datetime.now(timezone.utc).isoformat(),
                "event_hash": self._compute_event_hash(artifact, prev_hash),
                "prev_hash": prev_hash,
                "artifact": artifact,
            }
            ledger.append(entry)
            self._save_ledger(ledger)
            return entry["index"]

    def get_entry(self, index: int) -> Optional[Dict[str, Any]]:
        ledger = self._load_ledger()
        if 0 <= index < len(ledger):
            return ledger[index]
        return None

    def get_all_entries(self) -> List[Dict[str, Any]]:
        return self._load_ledger()

    def _resolve(self, recorded: str) -> Path:
        path = Path(recorded)
        return path if path.is_absolute() else self.out_dir / path

    def verify_chain_integrity(self, check_files: bool = True) -> bool:
        """Chain links, entry hashes and (optionally) current file digests."""
        ledger = self._load_ledger()
        for i in range(1, len(ledger)):
            current = ledger[i]
            previous = ledger[i - 1]
            if current["prev_hash"] != previous["event_hash"]:
                return False
            artifact = current["artifact"]
            if current["event_hash"] != self._compute_event_hash(artifact, current["prev_hash"]):
                return False
            if check_files:
                path = self._resolve(artifact["path"])
                if not path.exists() or file_digest(path) != artifact["sha256"]:
                    return False
        return True

    def get_chain_length(self) -> int:
        return len(self._load_ledger())

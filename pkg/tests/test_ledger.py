import json

import pytest

from provenance_chain.hash_chain_ledger import GENESIS_HASH, RunLedger, file_digest


class TestRunLedger:
    @pytest.fixture(autouse=True)
    def setup(self, tmp_path):
        self.out = tmp_path
        self.ledger = RunLedger(tmp_path)
        self.artifact = tmp_path / "params.csv"
        self.artifact.write_text("name,value\nb,2.7000000000000002\n")

    def test_genesis_entry(self):
        genesis = self.ledger.get_entry(0)
        assert genesis["prev_hash"] == GENESIS_HASH
        assert genesis["artifact"] is None

    def test_append_links_entries(self):
        index = self.ledger.append_artifact(self.artifact, "csv")
        entry = self.ledger.get_entry(index)
        assert index == 1
        assert entry["prev_hash"] == self.ledger.get_entry(0)["event_hash"]
        assert entry["artifact"]["path"] == "params.csv"
        assert entry["artifact"]["sha256"] == file_digest(self.artifact)
        assert self.ledger.verify_chain_integrity()

    def test_edited_artifact_detected(self):
        self.ledger.append_artifact(self.artifact, "csv")
        self.artifact.write_text("name,value\nb,2.0\n")
        assert not self.ledger.verify_chain_integrity()
        assert self.ledger.verify_chain_integrity(check_files=False)

    def test_tampered_entry_detected(self):
        self.ledger.append_artifact(self.artifact, "csv")
        entries = self.ledger.get_all_entries()
        entries[1]["artifact"]["kind"] = "json"
        self.ledger.ledger_file.write_text(json.dumps(entries))
        assert not self.ledger.verify_chain_integrity(check_files=False)

    def test_fresh_drops_old_chain(self):
        self.ledger.append_artifact(self.artifact, "csv")
        fresh = RunLedger.fresh(self.out)
        assert fresh.get_chain_length() == 1
        assert self.ledger.get_entry(1) is None

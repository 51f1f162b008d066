from provenance_chain.hash_chain_ledger import RunLedger, file_digest

__all__ = ["RunLedger", "file_digest"]

"""Approximate model counting with local parity hashes."""

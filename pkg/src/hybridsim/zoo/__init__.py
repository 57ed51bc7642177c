"""Bundled model configs for the seven decoder-only LLMs used in the sweeps."""

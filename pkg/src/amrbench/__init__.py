"""Workbench for benchmarking neural automatic modulation recognition models
on synthetic IQ frames: signal synthesis, corpus management, a small
reverse-mode training engine, nine replicated architectures, and the
reporting pipeline that compares them."""

__version__ = "0.1.0"

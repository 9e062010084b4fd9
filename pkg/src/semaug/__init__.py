"""Syntax-rule transposition augmentation for Mandarin ASR corpora."""

__version__ = "0.1.0"

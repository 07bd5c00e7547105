"""lexsimp: provider-agnostic lexical simplification toolkit.

Multi-voter simplification pipeline, single-prompt baselines, weighted
precision/recall evaluation, and a human-in-the-loop annotation studio.
"""

__version__ = "0.1.0"

"""Evaluation toolkit for GUI agent click predictions.

Generates annotated synthetic icon scenes, classifies predicted points into
a four-way response taxonomy, scores prediction confidence from digit-token
score vectors, plans context-aware crops for two-pass refinement, and
aggregates everything into report tables.
"""

__version__ = "0.1.0"

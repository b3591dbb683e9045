"""Model bridge for the glens evaluation pipeline.

Runs a multimodal model (or a deterministic mock) over grounding tasks,
captures the digit-token score vectors at each coordinate's tenths-digit
generation step, and writes prediction records that the primary toolkit's
validator accepts. Talks to the primary only through its file formats and
command-line interface.
"""

__version__ = "0.1.0"

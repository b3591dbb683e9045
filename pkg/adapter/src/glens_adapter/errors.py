class AdapterError(Exception):
    """Base class for adapter failures."""


class UnsupportedTokenizer(AdapterError):
    """The tokenizer does not map every digit to a single token."""


class UnparsableOutput(AdapterError):
    """Model output contains no coordinate pair."""


class MissingKeyStep(AdapterError):
    """No generation step isolates a coordinate's tenths digit."""

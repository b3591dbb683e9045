"""Exception hierarchy shared across the toolkit."""


class GlensError(Exception):
    """Base class for all toolkit errors."""


class InvalidScene(GlensError):
    """Scene annotations are inconsistent (e.g. target listed among distractors)."""


class EmptyInput(GlensError):
    """An aggregation was asked to summarize zero records."""


class MalformedDistribution(GlensError):
    """A digit distribution is not 10 finite values."""


class UnparsableOutput(GlensError):
    """Model output text does not contain a coordinate pair."""


class MissingKeyStep(GlensError):
    """No generation step carries the tenths digit of a coordinate."""


class InvalidProbability(GlensError):
    """A token probability outside (0, 1] was supplied."""


class DegenerateEmbedding(GlensError):
    """An embedding vector has zero norm."""


class DegenerateImage(GlensError):
    """Requested crop would have zero width or height."""


class DimensionMismatch(GlensError):
    """Image dimensions do not match the expected size."""


class OverconstrainedLayout(GlensError):
    """Rejection sampling could not place an icon within the attempt cap."""


class EmptyLibrary(GlensError):
    """Icon library has fewer icons than requested."""


class BadTemplate(GlensError):
    """Instruction template lacks the required {name} slot."""


class EmptyName(GlensError):
    """Icon has an empty display name."""


class DegenerateSample(GlensError):
    """Both samples in a significance test have zero variance."""


class MissingSplit(GlensError):
    """A requested split has no records."""


class ConfigError(GlensError):
    """Run configuration failed validation."""

"""Exception hierarchy shared across the toolkit.

Every error raised on purpose derives from LexsimpError so callers (and the
CLI) can distinguish our failures from genuine bugs.
"""


class LexsimpError(Exception):
    """Base class for all toolkit errors."""


class ParseError(LexsimpError):
    """Input text or a serialized record could not be interpreted."""


class ValidationError(LexsimpError):
    """A value violates a domain invariant."""


class IoError(LexsimpError):
    """Reading or writing a stream failed."""


class TemplateError(LexsimpError):
    """A prompt template could not be rendered (missing slot, bad shot count)."""


class SpanError(LexsimpError):
    """A character span does not fit the sentence it refers to."""


class ConfigError(LexsimpError):
    """A provider or pipeline configuration is unusable."""


class TransportError(LexsimpError):
    """An HTTP provider call failed after exhausting retries."""


class ScriptMissError(LexsimpError):
    """A scripted provider had no canned response for a request (test bug)."""


class ArityError(LexsimpError):
    """The number of voter inputs does not match the configured voter count."""


class EmptyOutputError(LexsimpError):
    """A provider returned nothing usable for a required stage."""


class StageError(LexsimpError):
    """Every voter call in a pipeline stage failed."""


class InputError(LexsimpError):
    """Mismatched or incomplete inputs to an operation."""


class NotFoundError(LexsimpError):
    """A referenced entity (task, instance) does not exist."""


class IncompleteError(LexsimpError):
    """An export was requested before every substitute was judged."""

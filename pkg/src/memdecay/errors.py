"""Exception hierarchy.

Every error raised on bad user input derives from :class:`MemDecayError`
(itself a ``ValueError``) so the CLI can map the whole family onto exit
code 1.
"""


class MemDecayError(ValueError):
    pass


class EmptyInput(MemDecayError):
    pass


class LengthMismatch(MemDecayError):
    pass


class TooFewItems(MemDecayError):
    pass


class ZeroVariance(MemDecayError):
    pass


class InvalidRange(MemDecayError):
    pass


class MissingVideos(MemDecayError):
    def __init__(self, missing):
        self.missing = sorted(missing)
        shown = ", ".join(self.missing[:10])
        more = "" if len(self.missing) <= 10 else f" (+{len(self.missing) - 10} more)"
        super().__init__(f"{len(self.missing)} video(s) not found: {shown}{more}")


class MissingScores(MissingVideos):
    pass


class TooFewParticipants(MemDecayError):
    pass


class TooFewBins(MemDecayError):
    pass


class InvalidSpec(MemDecayError):
    pass


class SchemaError(MemDecayError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        parts = []
        if path is not None:
            parts.append(str(path))
        if line is not None:
            parts.append(f"line {line}")
        super().__init__(f"{', '.join(parts)}: {message}" if parts else message)

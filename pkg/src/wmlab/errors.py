"""Exception types raised at module boundaries."""


class WmlabError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(WmlabError):
    """Operands have incompatible shapes."""


class InvalidParameter(WmlabError):
    """A parameter is outside its documented domain."""


class ImageTooSmall(InvalidParameter):
    """The image is below the minimum size for the operation."""


class NonSquare(InvalidParameter):
    """A square image is required."""


class NotPowerOfTwo(InvalidParameter):
    """A power-of-two image size is required."""


class MalformedFile(WmlabError):
    """A file or stream could not be parsed."""


class UnsupportedFormat(WmlabError):
    """The file is parseable but uses an unsupported variant."""


class DegenerateVariance(WmlabError):
    """A variance estimate collapsed below the usable floor."""


class EmptyMask(WmlabError):
    """A mask with at least one true pixel is required."""


class FullMask(WmlabError):
    """A mask covering the whole image leaves nothing to work from."""


class EmptyCandidates(WmlabError):
    """A non-empty candidate list is required."""


class EmptyInput(WmlabError):
    """A non-empty value list is required."""


class BackendFailure(WmlabError):
    """An attack-pipeline stage backend failed.

    Carries the stage name so harness logs can say which stage broke.
    """

    def __init__(self, stage, message):
        self.stage = stage
        super().__init__(f"{stage}: {message}")


class ConfigError(WmlabError):
    """A benchmark configuration is invalid."""


class IoError(WmlabError):
    """Reading or writing a report or config file failed."""

"""Exception types raised across the pipeline."""


class CourtnetError(Exception):
    """Base class for all courtnet errors."""


class UnreadableFile(CourtnetError):
    """Source file missing or not readable."""


class EncodingError(CourtnetError):
    """Source bytes are neither valid UTF-8 nor recognizable RTF."""


class EmptyDocument(CourtnetError):
    """Document text is empty after normalization."""


class InvalidMix(CourtnetError):
    """Jurisdiction mix does not describe a probability distribution."""


class InvalidThreshold(CourtnetError):
    """Similarity threshold outside [0, 1]."""


class MissingConclusion(CourtnetError):
    """No conclusion marker found; the document cannot be segmented."""


class OutOfOrderMarkers(CourtnetError):
    """A mandatory marker appears before an earlier one in the profile order."""


class EmptyCorpus(CourtnetError):
    """No documents to process."""


class EmptyNetwork(CourtnetError):
    """Network has no nodes."""


class UnknownLawyer(CourtnetError):
    """Lawyer does not appear in any of the given case results."""


class NoDeterminedCases(CourtnetError):
    """Lawyer has no case with a determined outcome."""


class NoDeterminedOutcomes(CourtnetError):
    """No determined outcomes to compute a rate over."""

"""Errors raised while reading or slicing DICOM files."""


class DicomError(Exception):
    """Base class for every structured parse/extract failure."""


class InvalidPreamble(DicomError):
    """File is shorter than 132 bytes or lacks the DICM magic at offset 128."""


class TruncatedElement(DicomError):
    """A declared element length runs past the end of the available bytes."""


class MalformedDataset(DicomError):
    """Structurally invalid encoding (bad VR bytes, stray delimiters, over-deep nesting)."""


class UnsupportedTransferSyntax(DicomError):
    """Dataset encoding outside the supported little-endian pair.

    Raised by frame extraction for compressed or deflated syntaxes;
    parsing itself tolerates them where the byte layout still allows it.
    """


class FrameOutOfRange(DicomError):
    """Requested frame index is not in 1..NumberOfFrames."""


class MissingMandatoryAttribute(DicomError):
    """A hierarchy UID required for indexing is absent from the dataset."""

    def __init__(self, tag):
        self.tag = tag
        super().__init__(f"missing mandatory attribute {tag}")


class InvalidUid(DicomError):
    """UID value violates the dotted-numeric, <=64 chars rule."""

"""Frame slicing for uncompressed little-endian pixel payloads."""

from __future__ import annotations

from .dataset import DicomObject
from .errors import FrameOutOfRange, UnsupportedTransferSyntax


def extract_frame(obj: DicomObject, file_bytes: bytes, frame_index: int) -> bytes:
    """Return the raw bytes of one frame (1-based index) from the original file image."""
    if not obj.frame_servable:
        raise UnsupportedTransferSyntax(
            f"frames not servable for transfer syntax {obj.transfer_syntax}"
        )
    locator = obj.pixel_locator
    if not 1 <= frame_index <= locator.frame_count:
        raise FrameOutOfRange(f"frame {frame_index} of {locator.frame_count}")
    size = locator.frame_size
    start = locator.offset + (frame_index - 1) * size
    return file_bytes[start : start + size]

"""Instance storage, metadata index, and permission-filtered query service."""

from .errors import (
    ArchiveError,
    DuplicateSOPInstanceUID,
    Forbidden,
    MalformedQuery,
    NotFound,
    StorageFailure,
)
from .service import (
    Archive,
    INDEXED_ATTRIBUTES,
    Query,
    QueryLevel,
    QueryResult,
    ROW_ATTRIBUTES,
    StoredInstance,
)
from .storage import BlobStore

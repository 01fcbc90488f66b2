"""Archive-level failures mapped to HTTP statuses by the web layer."""


class ArchiveError(Exception):
    pass


class DuplicateSOPInstanceUID(ArchiveError):
    pass


class StorageFailure(ArchiveError):
    pass


class NotFound(ArchiveError):
    pass


class Forbidden(ArchiveError):
    """Signals HTTP 403 upstream."""


class MalformedQuery(ArchiveError):
    pass

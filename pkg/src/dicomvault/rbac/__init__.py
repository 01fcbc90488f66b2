"""Role-based access control: data model, persistent store, decision engine."""

from .engine import RbacEngine
from .errors import (
    DuplicateEntity,
    DuplicateResource,
    InvalidValidityWindow,
    InvariantViolation,
    MalformedRequest,
    RbacError,
    ReferencedEntity,
    ShareNotPermitted,
    UnknownEntity,
    UnknownGrant,
    UnknownResource,
    UnknownRole,
    UnknownUser,
)
from .model import (
    Category,
    Decision,
    DecisionReason,
    Facility,
    Operation,
    Organization,
    Permission,
    ResourceDescriptor,
    ResourceGrant,
    ResourceKind,
    Role,
    Scope,
    Share,
    SHAREABLE_OPERATIONS,
    User,
    normalize_operation,
    window_contains,
)
from .store import RbacStore

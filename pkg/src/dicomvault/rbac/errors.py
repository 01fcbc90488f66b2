"""Access-control and entity-store failures; HTTP layers map these to status codes."""


class RbacError(Exception):
    pass


class UnknownUser(RbacError):
    pass


class UnknownRole(RbacError):
    pass


class UnknownGrant(RbacError):
    pass


class UnknownResource(RbacError):
    pass


class UnknownEntity(RbacError):
    pass


class DuplicateEntity(RbacError):
    pass


class DuplicateResource(RbacError):
    pass


class ReferencedEntity(RbacError):
    """Deletion refused while other rows still point at the entity."""


class InvalidValidityWindow(RbacError):
    pass


class InvariantViolation(RbacError):
    """Payload breaks a structural rule (cross-organization reference, bad share ops, ...)."""


class ShareNotPermitted(RbacError):
    pass


class MalformedRequest(RbacError):
    pass

"""Authorization decisions: deny by default, role grants, stow-time grants, shares.

Three grant routes can allow a request, checked in order:
  role permission -> materialized owner/facility grant -> user-to-user share.
When everything fails, the deny reason is the most specific failure seen
(EXPIRED > MODALITY > SCOPE > DEFAULT).
"""

from __future__ import annotations

from .errors import MalformedRequest, ShareNotPermitted, UnknownResource, UnknownRole, UnknownUser
from .model import (
    Category,
    Decision,
    DecisionReason,
    DENY_RANK,
    Operation,
    Permission,
    ResourceDescriptor,
    Scope,
    Share,
    User,
    window_contains,
)
from .store import RbacStore


def _scope_admits(scope: Scope, user: User, resource: ResourceDescriptor) -> bool:
    if scope is Scope.GLOBAL:
        return True
    if scope is Scope.ORGANIZATION:
        return resource.organization_id == user.organization_id
    return bool(resource.facility_ids & user.facility_ids)


class RbacEngine:
    def __init__(self, store: RbacStore):
        self.store = store

    def authorize(self, user_id: str, operation: Operation, category: Category,
                  resource: ResourceDescriptor | None = None, now: float = 0.0) -> Decision:
        user = self.store.get_user(user_id)
        if user is None:
            raise UnknownUser(user_id)
        if category is Category.RESOURCE:
            # ADD is the creation case: there is no resource to point at yet.
            if resource is None and operation is not Operation.ADD:
                raise MalformedRequest("RESOURCE authorization requires a resource descriptor")
        elif resource is not None:
            raise MalformedRequest(f"category {category.value} takes no resource")

        deny = DecisionReason.DENY_DEFAULT

        for perm in self.store.permissions_for_user(user_id):
            if perm.operation is not operation or perm.category is not category:
                continue
            if not window_contains(perm.validity, now):
                deny = max(deny, DecisionReason.DENY_EXPIRED, key=DENY_RANK.get)
                continue
            if resource is not None and perm.modality_filter is not None \
                    and resource.modality not in perm.modality_filter:
                deny = max(deny, DecisionReason.DENY_MODALITY, key=DENY_RANK.get)
                continue
            if resource is not None and not _scope_admits(perm.scope, user, resource):
                deny = max(deny, DecisionReason.DENY_SCOPE, key=DENY_RANK.get)
                continue
            return Decision(True, DecisionReason.ROLE_GRANT, perm.id)

        if category is Category.RESOURCE and resource is not None:
            grant = self.store.matching_resource_grant(resource.resource_id, operation, user)
            if grant is not None:
                return Decision(True, DecisionReason.ROLE_GRANT, grant.id)

            for share in self.store.shares_to(user_id, resource.resource_id):
                if operation not in share.operations:
                    continue
                if not window_contains(share.validity, now):
                    deny = max(deny, DecisionReason.DENY_EXPIRED, key=DENY_RANK.get)
                    continue
                return Decision(True, DecisionReason.SHARE_GRANT, share.id)

        return Decision(False, deny)

    def grant_permission(self, role_id: str, operation: Operation, category: Category,
                         scope: Scope, modality_filter: frozenset[str] | None = None,
                         validity: tuple[float, float] | None = None) -> Permission:
        if not self.store.get_role(role_id):
            raise UnknownRole(role_id)
        return self.store.add_permission(role_id, operation, category, scope,
                                         modality_filter, validity)

    def revoke_permission(self, role_id: str, permission_id: str) -> None:
        self.store.remove_permission(role_id, permission_id)

    def create_share(self, grantor_user_id: str, grantee_user_id: str, resource_id: str,
                     operations: frozenset[Operation],
                     validity: tuple[float, float] | None = None, now: float = 0.0) -> Share:
        resource = self.store.get_resource(resource_id)
        if resource is None:
            raise UnknownResource(resource_id)
        decision = self.authorize(grantor_user_id, Operation.SHARE, Category.RESOURCE,
                                  resource, now)
        if not decision.allowed:
            raise ShareNotPermitted(f"grantor lacks SHARE on {resource_id} ({decision.reason.value})")
        return self.store.add_share(grantor_user_id, grantee_user_id, resource_id,
                                    operations, validity)

    def register_resource(self, descriptor: ResourceDescriptor) -> None:
        self.store.register_resource(descriptor)

    def effective_permissions(self, user_id: str, now: float) -> tuple[
            set[tuple[Operation, Category, Scope, frozenset[str] | None]], list[Share]]:
        """Deduplicated role grants plus shares active at `now`."""
        if self.store.get_user(user_id) is None:
            raise UnknownUser(user_id)
        grants = {
            (p.operation, p.category, p.scope, p.modality_filter)
            for p in self.store.permissions_for_user(user_id)
            if window_contains(p.validity, now)
        }
        shares = [s for s in self.store.shares_to(user_id) if window_contains(s.validity, now)]
        return grants, shares

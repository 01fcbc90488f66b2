"""Exhaustive brute-force authorization evaluator plus a randomized universe builder.

The evaluator re-derives every decision from plain tuples with its own loops;
it never touches the production engine or its SQL, so agreement between the
two is meaningful evidence.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from dicomvault.db import Database
from dicomvault.rbac import (
    Category,
    Operation,
    RbacEngine,
    RbacStore,
    ResourceDescriptor,
    ResourceKind,
    Scope,
)

OPS = list(Operation)
CATEGORIES = list(Category)
SCOPES = list(Scope)
MODALITIES = ["CT", "MR", "US", "XA", "CR"]

RANK = {"DENY_DEFAULT": 0, "DENY_SCOPE": 1, "DENY_MODALITY": 2, "DENY_EXPIRED": 3}


@dataclass
class OUser:
    id: str
    org: str
    facilities: set[str]
    roles: set[str]


@dataclass
class OPerm:
    role: str
    op: str
    category: str
    scope: str
    modalities: set[str] | None
    window: tuple[float, float] | None


@dataclass
class OResource:
    id: str
    org: str
    facilities: set[str]
    modality: str
    owner: str


@dataclass
class OGrant:
    resource: str
    subject_kind: str
    subject: str
    op: str


@dataclass
class OShare:
    grantor: str
    grantee: str
    resource: str
    ops: set[str]
    window: tuple[float, float] | None


@dataclass
class Universe:
    users: dict[str, OUser] = field(default_factory=dict)
    perms: list[OPerm] = field(default_factory=list)
    resources: dict[str, OResource] = field(default_factory=dict)
    grants: list[OGrant] = field(default_factory=list)
    shares: list[OShare] = field(default_factory=list)


def brute_force(u: Universe, user_id: str, op: str, category: str,
                resource_id: str | None, now: float) -> tuple[bool, str]:
    user = u.users[user_id]
    res = u.resources[resource_id] if resource_id else None
    deny = "DENY_DEFAULT"

    def worse(candidate: str) -> str:
        return candidate if RANK[candidate] > RANK[deny] else deny

    for perm in u.perms:
        if perm.role not in user.roles or perm.op != op or perm.category != category:
            continue
        if perm.window is not None and not (perm.window[0] <= now < perm.window[1]):
            deny = worse("DENY_EXPIRED")
            continue
        if res is not None and perm.modalities is not None and res.modality not in perm.modalities:
            deny = worse("DENY_MODALITY")
            continue
        if res is not None:
            if perm.scope == "OWN_FACILITIES" and not (res.facilities & user.facilities):
                deny = worse("DENY_SCOPE")
                continue
            if perm.scope == "ORGANIZATION" and res.org != user.org:
                deny = worse("DENY_SCOPE")
                continue
        return True, "ROLE_GRANT"

    if res is not None and category == "RESOURCE":
        for grant in u.grants:
            if grant.resource != res.id or grant.op != op:
                continue
            if grant.subject_kind == "USER" and grant.subject == user_id:
                return True, "ROLE_GRANT"
            if grant.subject_kind == "FACILITY" and grant.subject in user.facilities:
                return True, "ROLE_GRANT"
        for share in u.shares:
            if share.grantee != user_id or share.resource != res.id or op not in share.ops:
                continue
            if share.window is not None and not (share.window[0] <= now < share.window[1]):
                deny = worse("DENY_EXPIRED")
                continue
            return True, "SHARE_GRANT"

    return False, deny


def _maybe_window(rng: random.Random, base: float) -> tuple[float, float] | None:
    return rng.choice([
        None,
        (base - 100.0, base + 100.0),   # active at base
        (base - 300.0, base - 50.0),    # already over
        (base + 50.0, base + 300.0),    # not yet valid
    ])


def build_universe(rng: random.Random, base_now: float = 1_000_000.0,
                   n_users: int = 5, n_facilities: int = 3, n_resources: int = 20):
    """Random universe loaded into a fresh engine store and mirrored as plain tuples."""
    store = RbacStore(Database(":memory:"))
    engine = RbacEngine(store)
    universe = Universe()

    orgs = [store.create_organization(f"org-{i}") for i in range(rng.randint(1, 2))]
    facilities = []
    for i in range(n_facilities):
        org = rng.choice(orgs)
        facilities.append(store.create_facility(org.id, f"fac-{i}"))

    roles = []
    for i in range(rng.randint(2, 4)):
        org = rng.choice(orgs)
        roles.append(store.create_role(org.id, f"role-{i}"))

    for i in range(rng.randint(2, n_users)):
        org = rng.choice(orgs)
        user = store.create_user(f"user-{i}", "pw", org.id)
        own_facilities = [f for f in facilities if f.organization_id == org.id]
        chosen_facs = rng.sample(own_facilities, k=min(len(own_facilities), rng.randint(0, 2)))
        for fac in chosen_facs:
            store.assign_facility(user.id, fac.id)
        own_roles = [r for r in roles if r.organization_id == org.id]
        chosen_roles = rng.sample(own_roles, k=min(len(own_roles), rng.randint(0, 2)))
        for role in chosen_roles:
            store.assign_role(user.id, role.id)
        universe.users[user.id] = OUser(user.id, org.id, {f.id for f in chosen_facs},
                                        {r.id for r in chosen_roles})

    for role in roles:
        for _ in range(rng.randint(0, 4)):
            category = rng.choice([Category.RESOURCE] * 4 + [c for c in CATEGORIES])
            op = rng.choice(OPS)
            scope = rng.choice(SCOPES)
            modalities = None
            if category is Category.RESOURCE and rng.random() < 0.35:
                modalities = frozenset(rng.sample(MODALITIES, k=rng.randint(1, 2)))
            window = _maybe_window(rng, base_now)
            store.add_permission(role.id, op, category, scope, modalities, window)
            universe.perms.append(OPerm(role.id, op.value, category.value, scope.value,
                                        set(modalities) if modalities else None, window))

    user_list = list(universe.users.values())
    for i in range(n_resources):
        owner = rng.choice(user_list)
        org_id = owner.org
        org_facilities = [f for f in facilities if f.organization_id == org_id]
        chosen = rng.sample(org_facilities, k=min(len(org_facilities), rng.randint(0, 2)))
        modality = rng.choice(MODALITIES)
        rid = f"res-{i}"
        store.register_resource(ResourceDescriptor(
            resource_id=rid, kind=ResourceKind.DICOM_INSTANCE, owner_user_id=owner.id,
            organization_id=org_id, facility_ids=frozenset(f.id for f in chosen),
            modality=modality, sop_instance_uid=f"1.2.840.999.{i}"))
        universe.resources[rid] = OResource(rid, org_id, {f.id for f in chosen},
                                            modality, owner.id)
        if rng.random() < 0.5:
            # mimic stow-time provisioning: owner and owning facilities get GET/LIST
            for op in (Operation.GET, Operation.LIST):
                store.add_resource_grant(rid, "USER", owner.id, op)
                universe.grants.append(OGrant(rid, "USER", owner.id, op.value))
                for fac in chosen:
                    store.add_resource_grant(rid, "FACILITY", fac.id, op)
                    universe.grants.append(OGrant(rid, "FACILITY", fac.id, op.value))

    if len(user_list) >= 2:
        for _ in range(rng.randint(0, 6)):
            grantor, grantee = rng.sample(user_list, k=2)
            rid = rng.choice(list(universe.resources))
            ops = frozenset(rng.sample([Operation.GET, Operation.LIST, Operation.SHARE],
                                       k=rng.randint(1, 2)))
            window = _maybe_window(rng, base_now)
            store.add_share(grantor.id, grantee.id, rid, ops, window)
            universe.shares.append(OShare(grantor.id, grantee.id, rid,
                                          {o.value for o in ops}, window))

    return engine, store, universe


def descriptor_from_oracle(res: OResource) -> ResourceDescriptor:
    return ResourceDescriptor(
        resource_id=res.id, kind=ResourceKind.DICOM_INSTANCE, owner_user_id=res.owner,
        organization_id=res.org, facility_ids=frozenset(res.facilities), modality=res.modality)


def sample_tuples(rng: random.Random, universe: Universe, base_now: float, count: int):
    """Random (user, op, category, resource, now) probes around the window edges."""
    users = list(universe.users)
    resources = list(universe.resources)
    offsets = [0.0, -75.0, 75.0, -200.0, 200.0, -400.0, 400.0]
    out = []
    for _ in range(count):
        user_id = rng.choice(users)
        now = base_now + rng.choice(offsets)
        if resources and rng.random() < 0.8:
            out.append((user_id, rng.choice(OPS).value, "RESOURCE", rng.choice(resources), now))
        else:
            category = rng.choice([c.value for c in CATEGORIES if c is not Category.RESOURCE])
            out.append((user_id, rng.choice(OPS).value, category, None, now))
    return out


def compare_on_samples(engine: RbacEngine, universe: Universe, samples) -> int:
    """Assert engine and brute force agree on every sampled tuple; returns the count."""
    for user_id, op, category, resource_id, now in samples:
        expected_allowed, expected_reason = brute_force(universe, user_id, op, category,
                                                        resource_id, now)
        descriptor = descriptor_from_oracle(universe.resources[resource_id]) if resource_id else None
        decision = engine.authorize(user_id, Operation(op), Category(category), descriptor, now)
        assert decision.allowed == expected_allowed, (
            user_id, op, category, resource_id, now, decision, expected_reason)
        assert decision.reason.value == expected_reason, (
            user_id, op, category, resource_id, now, decision, expected_reason)
        if decision.allowed:
            assert decision.matched_grant_id
    return len(samples)

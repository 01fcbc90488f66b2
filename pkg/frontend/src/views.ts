// Pure render functions: state in, HTML out. No authorization logic lives
// here; every action is offered and the server decides (a denied call is
// surfaced inline). Buttons carry data-action attributes the app wires up.

import type {
  AuditRecord,
  Facility,
  Organization,
  Permission,
  Resource,
  Role,
  Settings,
  Share,
  Stats,
  User,
} from "./types.js";
import { CATEGORIES, OPERATIONS, SCOPES, SHAREABLE } from "./types.js";
import { agentLabel, esc, formatInstant } from "./format.js";

export const TABS = [
  "users",
  "facilities",
  "organizations",
  "roles",
  "resources",
  "shares",
  "audit",
  "settings",
] as const;
export type Tab = (typeof TABS)[number];

const TAB_COUNTS: Partial<Record<Tab, keyof Stats>> = {
  users: "users",
  facilities: "facilities",
  organizations: "organizations",
  roles: "roles",
  resources: "resources",
  shares: "shares",
  audit: "audit_records",
};

export function renderTabs(stats: Stats | null, active: Tab): string {
  const items = TABS.map((tab) => {
    const key = TAB_COUNTS[tab];
    const count = stats && key != null && stats[key] != null ? ` <span class="count">${stats[key]}</span>` : "";
    const cls = tab === active ? "tab active" : "tab";
    return `<button class="${cls}" data-action="tab" data-tab="${tab}">${esc(tab)}${count}</button>`;
  });
  return `<nav class="tabs">${items.join("")}</nav>`;
}

export function renderLogin(error: string | null): string {
  return `
  <section class="login">
    <h1>dicomvault console</h1>
    <form data-form="login">
      <label>Username <input name="username" autocomplete="username" required></label>
      <label>Password <input name="password" type="password" autocomplete="current-password" required></label>
      <button type="submit">Sign in</button>
      ${error ? `<p class="error">${esc(error)}</p>` : ""}
    </form>
  </section>`;
}

export function renderBanner(username: string, rbacMode: boolean | null): string {
  const mode = rbacMode === null ? "" : rbacMode
    ? '<span class="mode on">filter on</span>'
    : '<span class="mode off">filter off</span>';
  return `<header class="banner"><span>dicomvault</span>${mode}
    <span class="who">${esc(username)}</span>
    <button data-action="logout">Sign out</button></header>`;
}

export function renderError(message: string | null): string {
  if (!message) return "";
  return `<div class="error" data-role="error">${esc(message)}</div>`;
}

export function renderDenied(what: string): string {
  return `<div class="denied">Permission denied: ${esc(what)}. Ask an administrator for access.</div>`;
}

function nameOf<T extends { id: string }>(rows: T[], id: string, pick: (row: T) => string): string {
  const row = rows.find((r) => r.id === id);
  return row ? pick(row) : id;
}

export function renderOrganizations(rows: Organization[]): string {
  const body = rows
    .map(
      (org) => `<tr><td>${esc(org.name)}</td><td class="mono">${esc(org.id)}</td>
      <td><button data-action="delete-organization" data-id="${org.id}">delete</button></td></tr>`,
    )
    .join("");
  return `
  <h2>Organizations</h2>
  <table><thead><tr><th>Name</th><th>Id</th><th></th></tr></thead><tbody>${body}</tbody></table>
  <form data-form="create-organization" class="inline">
    <input name="name" placeholder="organization name" required>
    <button type="submit">Create organization</button>
  </form>`;
}

export function renderFacilities(rows: Facility[], orgs: Organization[]): string {
  const body = rows
    .map(
      (fac) => `<tr><td>${esc(fac.name)}</td><td>${esc(nameOf(orgs, fac.organization_id, (o) => o.name))}</td>
      <td><button data-action="delete-facility" data-id="${fac.id}">delete</button></td></tr>`,
    )
    .join("");
  const options = orgs.map((o) => `<option value="${o.id}">${esc(o.name)}</option>`).join("");
  return `
  <h2>Facilities</h2>
  <table><thead><tr><th>Name</th><th>Organization</th><th></th></tr></thead><tbody>${body}</tbody></table>
  <form data-form="create-facility" class="inline">
    <select name="organization_id" required>${options}</select>
    <input name="name" placeholder="facility name" required>
    <button type="submit">Create facility</button>
  </form>`;
}

export function renderUsers(rows: User[], orgs: Organization[], facilities: Facility[], roles: Role[]): string {
  const body = rows
    .map((user) => {
      const facNames = user.facility_ids.map((id) => esc(nameOf(facilities, id, (f) => f.name))).join(", ");
      const roleChips = user.role_ids
        .map(
          (id) =>
            `<span class="chip">${esc(nameOf(roles, id, (r) => r.name))}
             <button data-action="unassign-role" data-user="${user.id}" data-role="${id}">x</button></span>`,
        )
        .join(" ");
      return `<tr>
        <td>${esc(user.username)}</td><td>${esc(user.email)}</td>
        <td>${esc(nameOf(orgs, user.organization_id, (o) => o.name))}</td>
        <td>${facNames}</td><td>${roleChips}</td>
        <td>
          <select data-role="role-picker" data-user="${user.id}">
            <option value="">assign role...</option>
            ${roles
              .filter((r) => r.organization_id === user.organization_id && !user.role_ids.includes(r.id))
              .map((r) => `<option value="${r.id}">${esc(r.name)}</option>`)
              .join("")}
          </select>
          <button data-action="delete-user" data-id="${user.id}">delete</button>
        </td></tr>`;
    })
    .join("");
  const orgOptions = orgs.map((o) => `<option value="${o.id}">${esc(o.name)}</option>`).join("");
  return `
  <h2>Users</h2>
  <table><thead><tr><th>Username</th><th>Email</th><th>Organization</th><th>Facilities</th><th>Roles</th><th></th></tr></thead>
  <tbody>${body}</tbody></table>
  <form data-form="create-user" class="inline">
    <input name="username" placeholder="username" required>
    <input name="password" type="password" placeholder="password" required>
    <input name="email" placeholder="email">
    <select name="organization_id" required>${orgOptions}</select>
    <button type="submit">Create user</button>
  </form>`;
}

export function renderRoles(rows: Role[], orgs: Organization[], selected: string | null,
                            permissions: Permission[]): string {
  const body = rows
    .map(
      (role) => `<tr class="${role.id === selected ? "selected" : ""}">
      <td><button data-action="select-role" data-id="${role.id}">${esc(role.name)}</button></td>
      <td>${esc(nameOf(orgs, role.organization_id, (o) => o.name))}</td>
      <td><button data-action="delete-role" data-id="${role.id}">delete</button></td></tr>`,
    )
    .join("");
  const orgOptions = orgs.map((o) => `<option value="${o.id}">${esc(o.name)}</option>`).join("");
  return `
  <h2>Roles</h2>
  <table><thead><tr><th>Name</th><th>Organization</th><th></th></tr></thead><tbody>${body}</tbody></table>
  <form data-form="create-role" class="inline">
    <select name="organization_id" required>${orgOptions}</select>
    <input name="name" placeholder="role name" required>
    <button type="submit">Create role</button>
  </form>
  ${selected ? renderPermissionEditor(selected, permissions) : "<p>Select a role to edit its permissions.</p>"}`;
}

export function renderPermissionEditor(roleId: string, permissions: Permission[]): string {
  const body = permissions
    .map(
      (perm) => `<tr>
      <td>${esc(perm.operation)}</td><td>${esc(perm.category)}</td><td>${esc(perm.scope)}</td>
      <td>${perm.modality_filter ? esc(perm.modality_filter.join(", ")) : "any"}</td>
      <td>${perm.valid_from != null ? `${formatInstant(perm.valid_from)} - ${formatInstant(perm.valid_to ?? 0)}` : "always"}</td>
      <td><button data-action="revoke-permission" data-role="${roleId}" data-id="${perm.id}">revoke</button></td></tr>`,
    )
    .join("");
  const opts = (values: readonly string[]) =>
    values.map((v) => `<option value="${v}">${v}</option>`).join("");
  return `
  <h3>Permissions</h3>
  <table><thead><tr><th>Operation</th><th>Category</th><th>Scope</th><th>Modalities</th><th>Validity</th><th></th></tr></thead>
  <tbody>${body}</tbody></table>
  <form data-form="grant-permission" data-role="${roleId}" class="grid">
    <select name="operation">${opts(OPERATIONS)}<option value="READ">READ (alias)</option><option value="WRITE">WRITE (alias)</option><option value="CREATE">CREATE (alias)</option></select>
    <select name="category">${opts(CATEGORIES)}</select>
    <select name="scope">${opts(SCOPES)}</select>
    <input name="modalities" placeholder="modalities (CT,MR) - blank for any">
    <input name="valid_from" placeholder="valid from (2026-01-01T08:00)">
    <input name="valid_to" placeholder="valid to">
    <button type="submit">Grant</button>
  </form>`;
}

export function renderResources(rows: Resource[]): string {
  const body = rows
    .map(
      (res) => `<tr><td class="mono">${esc(res.sop_instance_uid ?? "-")}</td>
      <td>${esc(res.kind)}</td><td>${esc(res.modality)}</td>
      <td class="mono">${esc(res.owner_user_id)}</td></tr>`,
    )
    .join("");
  return `
  <h2>Resources you can list</h2>
  <table><thead><tr><th>SOP Instance UID</th><th>Kind</th><th>Modality</th><th>Owner</th></tr></thead>
  <tbody>${body}</tbody></table>`;
}

export function renderShares(rows: Share[], users: User[], resources: Resource[]): string {
  const body = rows
    .map(
      (share) => `<tr>
      <td>${esc(nameOf(users, share.grantor_user_id, (u) => u.username))}</td>
      <td>${esc(nameOf(users, share.grantee_user_id, (u) => u.username))}</td>
      <td class="mono">${esc(nameOf(resources, share.resource_id, (r) => r.sop_instance_uid ?? r.id))}</td>
      <td>${esc(share.operations.join(", "))}</td>
      <td>${share.valid_from != null ? `${formatInstant(share.valid_from)} - ${formatInstant(share.valid_to ?? 0)}` : "always"}</td>
      <td><button data-action="revoke-share" data-id="${share.id}">revoke</button></td></tr>`,
    )
    .join("");
  const userOptions = users.map((u) => `<option value="${u.id}">${esc(u.username)}</option>`).join("");
  const resourceOptions = resources
    .map((r) => `<option value="${r.id}">${esc(r.sop_instance_uid ?? r.id)}</option>`)
    .join("");
  const ops = SHAREABLE.map(
    (op) => `<label><input type="checkbox" name="op" value="${op}" ${op === "GET" ? "checked" : ""}>${op}</label>`,
  ).join(" ");
  return `
  <h2>Shares</h2>
  <table><thead><tr><th>Grantor</th><th>Grantee</th><th>Resource</th><th>Operations</th><th>Validity</th><th></th></tr></thead>
  <tbody>${body}</tbody></table>
  <form data-form="create-share" class="grid">
    <select name="grantee_user_id" required>${userOptions}</select>
    <select name="resource_id" required>${resourceOptions}</select>
    <span>${ops}</span>
    <input name="valid_from" placeholder="valid from (optional)">
    <input name="valid_to" placeholder="valid to">
    <button type="submit">Share</button>
  </form>`;
}

export function renderAuditBrowser(rows: AuditRecord[], page: number): string {
  const body = rows
    .map(
      (rec) => `<tr>
      <td>${formatInstant(rec.timestamp)}</td>
      <td>${esc(rec.username || rec.user_id || "-")}</td>
      <td class="mono">${esc(rec.request_url)} ${Object.keys(rec.parameters).length ? esc(JSON.stringify(rec.parameters)) : ""}</td>
      <td>${esc(rec.category)} ${esc(rec.operation)} <span class="status s${Math.floor(rec.status / 100)}xx">${rec.status}</span></td>
      <td>${esc(agentLabel(rec.user_agent))}</td></tr>`,
    )
    .join("");
  return `
  <h2>Audit trail</h2>
  <form data-form="audit-filter" class="grid">
    <input name="username" placeholder="user">
    <input name="category" placeholder="category">
    <input name="operation" placeholder="operation">
    <input name="status" placeholder="status (e.g. 403)">
    <input name="since" placeholder="since (2026-01-01T00:00)">
    <input name="until" placeholder="until">
    <button type="submit">Filter</button>
  </form>
  <table><thead><tr><th>Timestamp</th><th>User</th><th>Request</th><th>Outcome</th><th>Client</th></tr></thead>
  <tbody>${body}</tbody></table>
  <div class="pager">
    <button data-action="audit-page" data-delta="-1" ${page === 0 ? "disabled" : ""}>newer</button>
    <span>page ${page + 1}</span>
    <button data-action="audit-page" data-delta="1">older</button>
  </div>`;
}

export function renderSettings(settings: Settings | null): string {
  if (!settings) return renderDenied("settings");
  return `
  <h2>Settings</h2>
  <p>DICOMWeb access filter is <strong>${settings.rbac_mode ? "ON" : "OFF"}</strong>.
  Management authorization always stays on.</p>
  <button data-action="toggle-rbac" data-next="${settings.rbac_mode ? "off" : "on"}">
    Turn filter ${settings.rbac_mode ? "off" : "on"}
  </button>`;
}

// Console shell: session handling, tab routing, event wiring. All state is
// re-fetched from the API after every mutation; nothing is decided locally.

import { ApiClient, ApiError } from "./api.js";
import { buildAuditQuery, type AuditFilter } from "./auditQuery.js";
import type { AuditRecord, Facility, Organization, Permission, Resource, Role, Settings, Share, Stats, User } from "./types.js";
import {
  renderAuditBrowser,
  renderBanner,
  renderDenied,
  renderError,
  renderFacilities,
  renderLogin,
  renderOrganizations,
  renderPermissionEditor,
  renderResources,
  renderRoles,
  renderSettings,
  renderShares,
  renderTabs,
  renderUsers,
  TABS,
  type Tab,
} from "./views.js";

const TOKEN_KEY = "dicomvault.token";

interface AppState {
  username: string;
  tab: Tab;
  error: string | null;
  stats: Stats | null;
  settings: Settings | null;
  selectedRole: string | null;
  auditFilter: AuditFilter;
}

export class ConsoleApp {
  state: AppState = {
    username: "",
    tab: "users",
    error: null,
    stats: null,
    settings: null,
    selectedRole: null,
    auditFilter: { page: 0, pageSize: 50 },
  };
  private loginError: string | null = null;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private storage: Pick<Storage, "getItem" | "setItem" | "removeItem"> = window.localStorage,
  ) {
    api.token = this.storage.getItem(TOKEN_KEY);
    api.onUnauthorized = () => this.forceLogin();
    root.addEventListener("click", (event) => void this.onClick(event));
    root.addEventListener("submit", (event) => void this.onSubmit(event));
    root.addEventListener("change", (event) => void this.onChange(event));
  }

  async start(): Promise<void> {
    if (!this.api.token) {
      this.root.innerHTML = renderLogin(null);
      return;
    }
    await this.refresh();
  }

  private forceLogin(message: string | null = null): void {
    this.api.token = null;
    this.storage.removeItem(TOKEN_KEY);
    this.loginError = message;
    this.root.innerHTML = renderLogin(message);
  }

  private async guarded<T>(work: () => Promise<T>): Promise<T | undefined> {
    try {
      this.state.error = null;
      return await work();
    } catch (err) {
      if (err instanceof ApiError) {
        if (err.status === 401) return undefined; // onUnauthorized already ran
        this.state.error = `${err.status}: ${err.message}`;
      } else {
        this.state.error = String(err);
      }
      return undefined;
    }
  }

  async refresh(): Promise<void> {
    const me = await this.guarded(() => this.api.me());
    if (!me) {
      if (this.api.token === null) return; // redirected to login
      this.renderShell("<p>Could not load profile.</p>");
      return;
    }
    this.state.username = me.username;
    this.state.stats = (await this.guarded(() => this.api.stats())) ?? null;
    this.state.settings = await this.settingsOrNull();
    await this.renderTab();
  }

  private async settingsOrNull(): Promise<Settings | null> {
    try {
      return await this.api.getSettings();
    } catch {
      return null;
    }
  }

  private renderShell(content: string): void {
    const rbacMode = this.state.settings?.rbac_mode ?? null;
    this.root.innerHTML =
      renderBanner(this.state.username, rbacMode) +
      renderTabs(this.state.stats, this.state.tab) +
      renderError(this.state.error) +
      `<main>${content}</main>`;
  }

  private async renderTab(): Promise<void> {
    const tab = this.state.tab;
    let content = "";
    try {
      content = await this.tabContent(tab);
    } catch (err) {
      if (err instanceof ApiError && err.status === 403) {
        content = renderDenied(tab);
      } else if (err instanceof ApiError && err.status === 401) {
        return;
      } else {
        content = `<p class="error">${String(err)}</p>`;
      }
    }
    this.renderShell(content);
  }

  private async tabContent(tab: Tab): Promise<string> {
    switch (tab) {
      case "organizations":
        return renderOrganizations(await this.api.listOrganizations());
      case "facilities": {
        const [facilities, orgs] = await Promise.all([
          this.api.listFacilities(),
          this.api.listOrganizations(),
        ]);
        return renderFacilities(facilities, orgs);
      }
      case "users": {
        const [users, orgs, facilities, roles] = await Promise.all([
          this.api.listUsers(),
          this.api.listOrganizations(),
          this.api.listFacilities(),
          this.api.listRoles(),
        ]);
        return renderUsers(users, orgs, facilities, roles);
      }
      case "roles": {
        const [roles, orgs] = await Promise.all([this.api.listRoles(), this.api.listOrganizations()]);
        const selected = this.state.selectedRole;
        const permissions = selected ? await this.api.listRolePermissions(selected) : [];
        return renderRoles(roles, orgs, selected, permissions);
      }
      case "resources":
        return renderResources(await this.api.listResources());
      case "shares": {
        const [shares, users, resources] = await Promise.all([
          this.api.listShares(),
          this.api.listUsers().catch(() => [] as User[]),
          this.api.listResources(),
        ]);
        return renderShares(shares, users, resources);
      }
      case "audit":
        return renderAuditBrowser(
          await this.api.listAudit(buildAuditQuery(this.state.auditFilter)),
          this.state.auditFilter.page,
        );
      case "settings":
        return renderSettings(this.state.settings);
    }
  }

  private async onClick(event: Event): Promise<void> {
    const target = (event.target as HTMLElement).closest("[data-action]") as HTMLElement | null;
    if (!target) return;
    const action = target.dataset.action!;
    const id = target.dataset.id ?? "";
    const run = (work: () => Promise<unknown>) =>
      this.guarded(work).then(() => this.refresh());

    switch (action) {
      case "tab":
        this.state.tab = target.dataset.tab as Tab;
        this.state.error = null;
        await this.renderTab();
        break;
      case "logout":
        await this.guarded(() => this.api.logout());
        this.forceLogin();
        break;
      case "delete-organization":
        await run(() => this.api.deleteOrganization(id));
        break;
      case "delete-facility":
        await run(() => this.api.deleteFacility(id));
        break;
      case "delete-user":
        await run(() => this.api.deleteUser(id));
        break;
      case "delete-role":
        if (this.state.selectedRole === id) this.state.selectedRole = null;
        await run(() => this.api.deleteRole(id));
        break;
      case "select-role":
        this.state.selectedRole = id;
        await this.renderTab();
        break;
      case "unassign-role":
        await run(() => this.api.unassignRole(target.dataset.user!, target.dataset.role!));
        break;
      case "revoke-permission":
        await run(() => this.api.revokePermission(target.dataset.role!, id));
        break;
      case "revoke-share":
        await run(() => this.api.revokeShare(id));
        break;
      case "audit-page": {
        const delta = Number(target.dataset.delta);
        this.state.auditFilter.page = Math.max(0, this.state.auditFilter.page + delta);
        await this.renderTab();
        break;
      }
      case "toggle-rbac":
        await run(() => this.api.putSettings(target.dataset.next === "on"));
        break;
    }
  }

  private async onChange(event: Event): Promise<void> {
    const target = event.target as HTMLSelectElement;
    if (target.dataset.role === "role-picker" && target.value) {
      const userId = target.dataset.user!;
      await this.guarded(() => this.api.assignRole(userId, target.value));
      await this.refresh();
    }
  }

  private async onSubmit(event: Event): Promise<void> {
    event.preventDefault();
    const form = event.target as HTMLFormElement;
    const kind = form.dataset.form;
    const data = new FormData(form);
    const text = (name: string) => String(data.get(name) ?? "").trim();

    if (kind === "login") {
      try {
        const session = await this.api.login(text("username"), text("password"));
        this.api.token = session.token;
        this.storage.setItem(TOKEN_KEY, session.token);
        this.loginError = null;
        await this.refresh();
      } catch (err) {
        const message = err instanceof ApiError ? err.message : String(err);
        this.forceLogin(message);
      }
      return;
    }

    const run = (work: () => Promise<unknown>) =>
      this.guarded(work).then(() => this.refresh());
    switch (kind) {
      case "create-organization":
        await run(() => this.api.createOrganization(text("name")));
        break;
      case "create-facility":
        await run(() => this.api.createFacility(text("organization_id"), text("name")));
        break;
      case "create-user":
        await run(() =>
          this.api.createUser({
            username: text("username"),
            password: text("password"),
            email: text("email"),
            organization_id: text("organization_id"),
          }),
        );
        break;
      case "create-role":
        await run(() => this.api.createRole(text("organization_id"), text("name")));
        break;
      case "grant-permission": {
        const roleId = form.dataset.role!;
        const modalities = text("modalities")
          .split(",")
          .map((m) => m.trim().toUpperCase())
          .filter(Boolean);
        await run(() =>
          this.api.grantPermission(roleId, {
            operation: text("operation"),
            category: text("category"),
            scope: text("scope"),
            modality_filter: modalities.length ? modalities : null,
            valid_from: text("valid_from") || null,
            valid_to: text("valid_to") || null,
          }),
        );
        break;
      }
      case "create-share": {
        const operations = data.getAll("op").map(String);
        await run(() =>
          this.api.createShare({
            grantee_user_id: text("grantee_user_id"),
            resource_id: text("resource_id"),
            operations,
            valid_from: text("valid_from") || null,
            valid_to: text("valid_to") || null,
          }),
        );
        break;
      }
      case "audit-filter":
        this.state.auditFilter = {
          ...this.state.auditFilter,
          username: text("username") || undefined,
          category: text("category") || undefined,
          operation: text("operation") || undefined,
          status: text("status") || undefined,
          since: text("since") || undefined,
          until: text("until") || undefined,
          page: 0,
        };
        await this.renderTab();
        break;
    }
  }
}

export function mount(root: HTMLElement): ConsoleApp {
  const app = new ConsoleApp(root, new ApiClient(""));
  void app.start();
  return app;
}

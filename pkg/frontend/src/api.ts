// Typed client for /auth and /api/v1. Every call carries the bearer token;
// a 401 fires the onUnauthorized hook so the app can force a fresh login.

import type {
  AuditRecord,
  Facility,
  LoginResponse,
  Organization,
  Permission,
  Resource,
  Role,
  Settings,
  Share,
  Stats,
  User,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

interface RequestOptions {
  method?: string;
  body?: unknown;
}

export interface PermissionPayload {
  operation: string;
  category: string;
  scope: string;
  modality_filter?: string[] | null;
  valid_from?: number | string | null;
  valid_to?: number | string | null;
}

export interface SharePayload {
  grantee_user_id: string;
  resource_id: string;
  operations: string[];
  valid_from?: number | string | null;
  valid_to?: number | string | null;
}

export class ApiClient {
  token: string | null = null;
  onUnauthorized: (() => void) | null = null;

  constructor(private baseUrl: string = "", private fetchFn: typeof fetch = fetch) {}

  private async request<T>(path: string, options: RequestOptions = {}): Promise<T> {
    const headers: Record<string, string> = {};
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    if (options.body !== undefined) headers["Content-Type"] = "application/json";
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: options.method ?? "GET",
      headers,
      body: options.body !== undefined ? JSON.stringify(options.body) : undefined,
    });
    if (response.status === 401) {
      this.onUnauthorized?.();
    }
    if (!response.ok) {
      let code = "error";
      let message = `${response.status}`;
      try {
        const detail = (await response.json()).detail;
        if (detail && typeof detail === "object") {
          code = detail.code ?? code;
          message = detail.message ?? message;
        } else if (typeof detail === "string") {
          message = detail;
        }
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, code, message);
    }
    if (response.status === 204) return undefined as T;
    return (await response.json()) as T;
  }

  // auth
  login(username: string, password: string): Promise<LoginResponse> {
    return this.request("/auth/login", { method: "POST", body: { username, password } });
  }
  logout(): Promise<unknown> {
    return this.request("/auth/logout", { method: "POST" });
  }
  me(): Promise<User> {
    return this.request("/api/v1/me");
  }

  // organizations
  listOrganizations(): Promise<Organization[]> {
    return this.request("/api/v1/organizations");
  }
  createOrganization(name: string): Promise<Organization> {
    return this.request("/api/v1/organizations", { method: "POST", body: { name } });
  }
  renameOrganization(id: string, name: string): Promise<Organization> {
    return this.request(`/api/v1/organizations/${id}`, { method: "PUT", body: { name } });
  }
  deleteOrganization(id: string): Promise<void> {
    return this.request(`/api/v1/organizations/${id}`, { method: "DELETE" });
  }

  // facilities
  listFacilities(organizationId?: string): Promise<Facility[]> {
    const suffix = organizationId ? `?organization_id=${encodeURIComponent(organizationId)}` : "";
    return this.request(`/api/v1/facilities${suffix}`);
  }
  createFacility(organizationId: string, name: string): Promise<Facility> {
    return this.request("/api/v1/facilities", {
      method: "POST",
      body: { organization_id: organizationId, name },
    });
  }
  deleteFacility(id: string): Promise<void> {
    return this.request(`/api/v1/facilities/${id}`, { method: "DELETE" });
  }

  // users
  listUsers(): Promise<User[]> {
    return this.request("/api/v1/users");
  }
  createUser(body: {
    username: string;
    password: string;
    organization_id: string;
    email?: string;
    facility_ids?: string[];
    role_ids?: string[];
  }): Promise<User> {
    return this.request("/api/v1/users", { method: "POST", body });
  }
  deleteUser(id: string): Promise<void> {
    return this.request(`/api/v1/users/${id}`, { method: "DELETE" });
  }
  assignRole(userId: string, roleId: string): Promise<void> {
    return this.request(`/api/v1/users/${userId}/roles/${roleId}`, { method: "POST" });
  }
  unassignRole(userId: string, roleId: string): Promise<void> {
    return this.request(`/api/v1/users/${userId}/roles/${roleId}`, { method: "DELETE" });
  }
  assignFacility(userId: string, facilityId: string): Promise<void> {
    return this.request(`/api/v1/users/${userId}/facilities/${facilityId}`, { method: "POST" });
  }
  unassignFacility(userId: string, facilityId: string): Promise<void> {
    return this.request(`/api/v1/users/${userId}/facilities/${facilityId}`, { method: "DELETE" });
  }

  // roles and permissions
  listRoles(): Promise<Role[]> {
    return this.request("/api/v1/roles");
  }
  createRole(organizationId: string, name: string): Promise<Role> {
    return this.request("/api/v1/roles", {
      method: "POST",
      body: { organization_id: organizationId, name },
    });
  }
  deleteRole(id: string): Promise<void> {
    return this.request(`/api/v1/roles/${id}`, { method: "DELETE" });
  }
  listRolePermissions(roleId: string): Promise<Permission[]> {
    return this.request(`/api/v1/roles/${roleId}/permissions`);
  }
  grantPermission(roleId: string, payload: PermissionPayload): Promise<{ created: Permission[] }> {
    return this.request(`/api/v1/roles/${roleId}/permissions`, { method: "POST", body: payload });
  }
  revokePermission(roleId: string, permissionId: string): Promise<void> {
    return this.request(`/api/v1/roles/${roleId}/permissions/${permissionId}`, {
      method: "DELETE",
    });
  }

  // resources and shares
  listResources(): Promise<Resource[]> {
    return this.request("/api/v1/resources");
  }
  listShares(): Promise<Share[]> {
    return this.request("/api/v1/shares");
  }
  createShare(payload: SharePayload): Promise<Share> {
    return this.request("/api/v1/shares", { method: "POST", body: payload });
  }
  revokeShare(id: string): Promise<void> {
    return this.request(`/api/v1/shares/${id}`, { method: "DELETE" });
  }

  // audit, stats, settings
  listAudit(query: string): Promise<AuditRecord[]> {
    return this.request(`/api/v1/audit${query ? "?" + query : ""}`);
  }
  stats(): Promise<Stats> {
    return this.request("/api/v1/stats");
  }
  getSettings(): Promise<Settings> {
    return this.request("/api/v1/settings");
  }
  putSettings(rbacMode: boolean): Promise<Settings> {
    return this.request("/api/v1/settings", { method: "PUT", body: { rbac_mode: rbacMode } });
  }
}

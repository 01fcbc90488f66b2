// Wire types for the management API (snake_case mirrors the server JSON).

export interface Organization {
  id: string;
  name: string;
}

export interface Facility {
  id: string;
  organization_id: string;
  name: string;
}

export interface User {
  id: string;
  username: string;
  email: string;
  organization_id: string;
  facility_ids: string[];
  role_ids: string[];
}

export interface Role {
  id: string;
  organization_id: string;
  name: string;
}

export interface Permission {
  id: string;
  operation: string;
  category: string;
  scope: string;
  modality_filter: string[] | null;
  valid_from: number | null;
  valid_to: number | null;
}

export interface Resource {
  id: string;
  kind: string;
  owner_user_id: string;
  organization_id: string;
  facility_ids: string[];
  modality: string;
  sop_instance_uid: string | null;
}

export interface Share {
  id: string;
  grantor_user_id: string;
  grantee_user_id: string;
  resource_id: string;
  operations: string[];
  valid_from: number | null;
  valid_to: number | null;
}

export interface AuditRecord {
  timestamp: number;
  user_id: string;
  username: string;
  request_url: string;
  parameters: Record<string, string>;
  category: string;
  operation: string;
  status: number;
  user_agent: string;
  client_ip: string;
}

export interface Stats {
  organizations: number | null;
  facilities: number | null;
  users: number | null;
  roles: number | null;
  resources: number;
  shares: number;
  audit_records: number | null;
}

export interface LoginResponse {
  token: string;
  user_id: string;
  username: string;
  expires_at: number;
}

export interface Settings {
  rbac_mode: boolean;
}

export const OPERATIONS = ["GET", "ADD", "LIST", "SHARE", "UPDATE", "DELETE"] as const;
export const CATEGORIES = ["RESOURCE", "USER", "ROLE", "FACILITY", "ORGANIZATION", "AUDIT"] as const;
export const SCOPES = ["OWN_FACILITIES", "ORGANIZATION", "GLOBAL"] as const;
export const SHAREABLE = ["GET", "LIST", "SHARE"] as const;

// Audit browser filter state -> server query string. The server applies every
// predicate; this module only encodes them.

import { parseInstant } from "./format.js";

export interface AuditFilter {
  username?: string;
  category?: string;
  operation?: string;
  status?: string;
  clientIp?: string;
  since?: string; // ISO-ish text from the form
  until?: string;
  page: number;
  pageSize: number;
}

export function buildAuditQuery(filter: AuditFilter): string {
  const params = new URLSearchParams();
  if (filter.username) params.set("username", filter.username);
  if (filter.category) params.set("category", filter.category);
  if (filter.operation) params.set("operation", filter.operation);
  if (filter.status) params.set("status", filter.status);
  if (filter.clientIp) params.set("client_ip", filter.clientIp);
  const since = filter.since ? parseInstant(filter.since) : null;
  const until = filter.until ? parseInstant(filter.until) : null;
  if (since !== null) params.set("since", String(since));
  if (until !== null) params.set("until", String(until));
  params.set("limit", String(filter.pageSize));
  params.set("offset", String(filter.page * filter.pageSize));
  return params.toString();
}

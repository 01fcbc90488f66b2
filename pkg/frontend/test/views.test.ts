import { describe, expect, it } from "vitest";

import {
  renderAuditBrowser,
  renderLogin,
  renderPermissionEditor,
  renderRoles,
  renderSettings,
  renderShares,
  renderTabs,
  renderUsers,
} from "../src/views.js";
import type { AuditRecord, Stats, User } from "../src/types.js";

const stats: Stats = {
  organizations: 2,
  facilities: 1,
  users: 5,
  roles: 4,
  resources: 9,
  shares: 3,
  audit_records: 120,
};

describe("renderTabs", () => {
  it("shows one counter per entity tab, matching the stats payload", () => {
    const html = renderTabs(stats, "users");
    expect(html).toContain('data-tab="users"');
    expect(html).toContain('<span class="count">5</span>');
    expect(html).toContain('<span class="count">120</span>');
    expect(html).toContain('class="tab active" data-action="tab" data-tab="users"');
  });

  it("omits counters the server withheld", () => {
    const html = renderTabs({ ...stats, users: null }, "audit");
    expect(html).not.toContain('<span class="count">5</span>');
  });
});

describe("renderUsers", () => {
  const users: User[] = [
    {
      id: "u1",
      username: "alice",
      email: "alice@x",
      organization_id: "o1",
      facility_ids: ["f1"],
      role_ids: ["r1"],
    },
  ];
  const orgs = [{ id: "o1", name: "Uni" }];
  const facilities = [{ id: "f1", organization_id: "o1", name: "Health" }];
  const roles = [
    { id: "r1", organization_id: "o1", name: "students" },
    { id: "r2", organization_id: "o1", name: "staff" },
  ];

  it("resolves names and offers every action regardless of who is looking", () => {
    const html = renderUsers(users, orgs, facilities, roles);
    expect(html).toContain("alice");
    expect(html).toContain("Health");
    expect(html).toContain("students");
    // no client-side authority: mutating controls are always rendered
    expect(html).toContain('data-action="delete-user"');
    expect(html).toContain('data-action="unassign-role"');
    expect(html).toContain('data-form="create-user"');
  });

  it("only offers same-organization roles for assignment", () => {
    const foreign = [...roles, { id: "r9", organization_id: "o2", name: "outsiders" }];
    const html = renderUsers(users, orgs, facilities, foreign);
    expect(html).toContain('<option value="r2">staff</option>');
    expect(html).not.toContain("outsiders");
  });
});

describe("permission editor", () => {
  it("offers canonical operations plus the management aliases", () => {
    const html = renderPermissionEditor("r1", []);
    for (const op of ["GET", "ADD", "LIST", "SHARE", "UPDATE", "DELETE", "READ", "WRITE", "CREATE"]) {
      expect(html).toContain(`value="${op}"`);
    }
    expect(html).toContain('name="modalities"');
    expect(html).toContain('name="valid_from"');
  });

  it("lists existing grants with revoke buttons", () => {
    const html = renderPermissionEditor("r1", [
      {
        id: "p1",
        operation: "GET",
        category: "RESOURCE",
        scope: "OWN_FACILITIES",
        modality_filter: ["CT"],
        valid_from: null,
        valid_to: null,
      },
    ]);
    expect(html).toContain("OWN_FACILITIES");
    expect(html).toContain("CT");
    expect(html).toContain('data-action="revoke-permission"');
  });
});

describe("roles view", () => {
  it("prompts for a selection before showing the editor", () => {
    const html = renderRoles([], [], null, []);
    expect(html).toContain("Select a role");
  });
});

describe("shares view", () => {
  it("renders the dialog with shareable operations only", () => {
    const html = renderShares([], [], []);
    expect(html).toContain('value="GET"');
    expect(html).toContain('value="LIST"');
    expect(html).toContain('value="SHARE"');
    expect(html).not.toContain('value="DELETE"');
  });
});

describe("audit browser", () => {
  const record: AuditRecord = {
    timestamp: Date.parse("2020-03-02T10:57:31Z") / 1000,
    user_id: "u1",
    username: "info@example.com",
    request_url: "/api/v1/users",
    parameters: { organization_id: "1" },
    category: "USER",
    operation: "LIST",
    status: 200,
    user_agent:
      "Mozilla/5.0 (Windows NT 10.0; Win64; x64) AppleWebKit/537.36 (KHTML, like Gecko) Chrome/80.0.3987.122 Safari/537.36",
    client_ip: "10.0.0.5",
  };

  it("shows timestamp, user, request, outcome, and parsed agent columns", () => {
    const html = renderAuditBrowser([record], 0);
    expect(html).toContain("2020-03-02 10:57:31");
    expect(html).toContain("info@example.com");
    expect(html).toContain("/api/v1/users");
    expect(html).toContain("USER");
    expect(html).toContain("LIST");
    expect(html).toContain(">200</span>");
    expect(html).toContain("Personal computer Windows 10.0 Chrome 80.0.3987.122");
  });

  it("escapes hostile content from records", () => {
    const hostile = { ...record, username: "<script>alert(1)</script>" };
    const html = renderAuditBrowser([hostile], 0);
    expect(html).not.toContain("<script>alert(1)</script>");
    expect(html).toContain("&lt;script&gt;");
  });

  it("keeps filter inputs and paging controls", () => {
    const html = renderAuditBrowser([], 2);
    expect(html).toContain('data-form="audit-filter"');
    expect(html).toContain("page 3");
    expect(html).toContain('data-action="audit-page"');
  });
});

describe("settings and login", () => {
  it("shows the current filter mode and the opposite toggle", () => {
    expect(renderSettings({ rbac_mode: true })).toContain('data-next="off"');
    expect(renderSettings({ rbac_mode: false })).toContain('data-next="on"');
    expect(renderSettings(null)).toContain("Permission denied");
  });

  it("renders login errors inline", () => {
    expect(renderLogin("bad credentials")).toContain("bad credentials");
    expect(renderLogin(null)).not.toContain('class="error"');
  });
});

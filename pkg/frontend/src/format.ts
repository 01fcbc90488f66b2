// Display helpers: HTML escaping, timestamps, user-agent summaries.
// User-agent parsing is cosmetic only; the server stores the raw string.

export function esc(value: unknown): string {
  return String(value ?? "")
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function formatInstant(epochSeconds: number): string {
  const date = new Date(epochSeconds * 1000);
  const pad = (n: number) => String(n).padStart(2, "0");
  return (
    `${date.getUTCFullYear()}-${pad(date.getUTCMonth() + 1)}-${pad(date.getUTCDate())} ` +
    `${pad(date.getUTCHours())}:${pad(date.getUTCMinutes())}:${pad(date.getUTCSeconds())}`
  );
}

export function parseInstant(text: string): number | null {
  if (!text.trim()) return null;
  const ms = Date.parse(text.trim().replace(" ", "T") + (text.includes("Z") ? "" : "Z"));
  return Number.isNaN(ms) ? null : ms / 1000;
}

interface AgentSummary {
  device: string;
  os: string;
  browser: string;
}

export function summarizeUserAgent(agent: string): AgentSummary {
  const ua = agent || "";
  let device = "Personal computer";
  if (/mobile|iphone|android/i.test(ua)) device = "Mobile device";
  else if (/ipad|tablet/i.test(ua)) device = "Tablet";

  let os = "Unknown OS";
  const windows = ua.match(/Windows NT ([\d.]+)/);
  const mac = ua.match(/Mac OS X ([\d_.]+)/);
  if (windows) os = `Windows ${windows[1]}`;
  else if (mac) os = `macOS ${mac[1].replaceAll("_", ".")}`;
  else if (/linux/i.test(ua)) os = "Linux";

  let browser = "Unknown browser";
  const edge = ua.match(/Edg\/([\d.]+)/);
  const chrome = ua.match(/Chrome\/([\d.]+)/);
  const firefox = ua.match(/Firefox\/([\d.]+)/);
  const safari = ua.match(/Version\/([\d.]+).*Safari/);
  if (edge) browser = `Edge ${edge[1]}`;
  else if (chrome) browser = `Chrome ${chrome[1]}`;
  else if (firefox) browser = `Firefox ${firefox[1]}`;
  else if (safari) browser = `Safari ${safari[1]}`;
  else if (ua) browser = ua.split(" ")[0];

  return { device, os, browser };
}

export function agentLabel(agent: string): string {
  const { device, os, browser } = summarizeUserAgent(agent);
  return `${device} ${os} ${browser}`;
}

/** Dashboard configuration: a single knob, the API base URL.
 *
 * Empty string = same origin, which is the default because the analytics
 * service can host the built dashboard itself (its ui_dir setting). A
 * cross-origin deployment sets <meta name="api-base" content="http://host:port">
 * or window.API_BASE before the bundle loads.
 */

export interface DashboardConfig {
  apiBase: string;
}

export function loadConfig(doc: Pick<Document, "querySelector"> | null): DashboardConfig {
  const meta = doc?.querySelector('meta[name="api-base"]');
  const fromMeta = meta?.getAttribute("content");
  if (fromMeta) {
    return { apiBase: fromMeta.replace(/\/$/, "") };
  }
  const fromGlobal = (globalThis as Record<string, unknown>)["API_BASE"];
  if (typeof fromGlobal === "string" && fromGlobal !== "") {
    return { apiBase: fromGlobal.replace(/\/$/, "") };
  }
  return { apiBase: "" };
}

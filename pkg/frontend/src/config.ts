/** Client configuration: service base URL and optional bearer token.
 *  Query parameters win, then localStorage, then the local default. */

export interface ClientConfig {
  baseUrl: string;
  token: string | null;
}

export const DEFAULT_BASE_URL = "http://127.0.0.1:8765";

export function readConfig(
  search: string = typeof location === "undefined" ? "" : location.search,
  storage: Pick<Storage, "getItem" | "setItem"> | null = typeof localStorage === "undefined"
    ? null
    : localStorage,
): ClientConfig {
  const params = new URLSearchParams(search);
  const baseUrl =
    params.get("base") ?? storage?.getItem("cpl.baseUrl") ?? DEFAULT_BASE_URL;
  const token = params.get("token") ?? storage?.getItem("cpl.token") ?? null;
  if (storage) {
    storage.setItem("cpl.baseUrl", baseUrl);
    if (token) storage.setItem("cpl.token", token);
  }
  return { baseUrl, token };
}

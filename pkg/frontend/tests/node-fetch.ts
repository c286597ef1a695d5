// Minimal fetch over node:http for the test realm: happy-dom's window.fetch
// enforces the same-origin policy, which would block the cross-port calls
// to the test server. Production code never uses this; the client's
// transport is injectable precisely for this.

import { request } from "node:http";
import type { MinimalResponse } from "../src/api.js";

export function nodeFetch(
  url: string,
  init?: RequestInit
): Promise<MinimalResponse> {
  return new Promise((resolve, reject) => {
    const req = request(
      url,
      {
        method: init?.method ?? "GET",
        headers: (init?.headers as Record<string, string>) ?? {},
      },
      (res) => {
        const chunks: Buffer[] = [];
        res.on("data", (chunk) => chunks.push(chunk));
        res.on("end", () => {
          const body = Buffer.concat(chunks).toString("utf-8");
          const status = res.statusCode ?? 0;
          resolve({
            ok: status >= 200 && status < 300,
            status,
            statusText: res.statusMessage ?? "",
            text: () => Promise.resolve(body),
          });
        });
      }
    );
    req.on("error", reject);
    if (init?.body) req.write(init.body);
    req.end();
  });
}

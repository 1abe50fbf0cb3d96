// Frozen fixture server: replays responses captured from the real portal
// (scripts/freeze_api_fixtures.py) through a fetch stub, so the UI tests
// exercise the exact wire contract without a running backend.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { ApiClient, FetchLike } from "../src/api.js";

const here = dirname(fileURLToPath(import.meta.url));

export const frozen: Record<string, unknown> = JSON.parse(
  readFileSync(join(here, "fixtures", "responses.json"), "utf-8"),
);

function jsonResponse(body: unknown, status = 200): Response {
  return {
    ok: status < 400,
    status,
    json: async () => body,
  } as unknown as Response;
}

export interface StubOptions {
  onPost?: (url: string, payload: unknown) => unknown;
}

export function stubFetch(log: string[] = [], options: StubOptions = {}): FetchLike {
  return async (url, init) => {
    log.push(`${init?.method ?? "GET"} ${url}`);
    if (init?.method === "POST") {
      const payload = JSON.parse(String(init.body));
      const body = options.onPost
        ? options.onPost(url, payload)
        : {
            annotationId: "ann-000099",
            targetId: (payload as { targetId: string }).targetId,
            body: (payload as { body: unknown }).body,
            author: (payload as { author: string }).author,
            created: "2013-06-01T00:00:00Z",
            state: "proposed",
            moderatorNote: "",
          };
      return jsonResponse(body, 201);
    }
    const hit = frozen[url];
    if (hit === undefined) {
      return jsonResponse(
        { code: "not-found", message: `no frozen response for ${url}`, details: {} },
        404,
      );
    }
    return jsonResponse(hit);
  };
}

export function frozenClient(log: string[] = [], options: StubOptions = {}): ApiClient {
  return new ApiClient("", stubFetch(log, options));
}

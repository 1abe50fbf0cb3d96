import { describe, expect, it } from "vitest";

import { loadView } from "../src/app.js";
import { decodeState, defaultState, encodeState } from "../src/state.js";
import { frozenClient } from "./helpers.js";

// Any view is reproducible from its URL alone: decoding the encoded state
// and loading it again issues the same requests and renders the same HTML.

const VIEWS = [
  { ...defaultState(), query: "Tagesbefehl" },
  { ...defaultState(), query: "Tagesbefehl", facets: { repository: ["1203"] } },
  { ...defaultState(), path: "unit" as const, unit: "jmp/terezin/bulletins/tb-440501" },
  { ...defaultState(), path: "map" as const },
  { ...defaultState(), path: "timeline" as const, from: "1945-01", to: "1945-12" },
  { ...defaultState(), path: "person" as const, person: "per-scheck" },
];

describe("URL reproducibility", () => {
  it("every view re-renders identically from its own URL", async () => {
    for (const state of VIEWS) {
      const firstLog: string[] = [];
      const first = await loadView(frozenClient(firstLog), state);
      const reopened = decodeState(`?${encodeState(state)}`);
      const secondLog: string[] = [];
      const second = await loadView(frozenClient(secondLog), reopened);
      expect(second.html).toBe(first.html);
      expect(secondLog).toEqual(firstLog);
    }
  });

  it("the UI keeps no server state: repeated loads are identical", async () => {
    const client = frozenClient();
    const state = VIEWS[0]!;
    const first = await loadView(client, state);
    const second = await loadView(client, state);
    expect(second).toEqual(first);
  });
});

import { describe, expect, it } from "vitest";

import type { MapResponse, TimelineEvent } from "../src/api.js";
import { loadView } from "../src/app.js";
import { defaultState } from "../src/state.js";
import { frozen, frozenClient } from "./helpers.js";

describe("map view", () => {
  it("renders one entry per place with verbatim unit counts", async () => {
    const view = await loadView(frozenClient(), { ...defaultState(), path: "map" });
    const collection = frozen["/api/v1/guide/terezin/map"] as MapResponse;
    for (const feature of collection.features) {
      expect(view.html).toContain(`data-place="${feature.id}"`);
      expect(view.html).toContain(`${feature.properties.linkedUnitCount} units`);
    }
    expect(view.html).toContain(`${collection.placedUnits} units placed`);
    expect(view.html).toContain(`${collection.unplacedUnits} without a place link`);
  });

  it("zero-link places render but are muted", async () => {
    const view = await loadView(frozenClient(), { ...defaultState(), path: "map" });
    const collection = frozen["/api/v1/guide/terezin/map"] as MapResponse;
    const empty = collection.features.find((f) => f.properties.linkedUnitCount === 0);
    expect(empty).toBeDefined();
    expect(view.html).toContain(`class="place muted" data-place="${empty!.id}"`);
  });

  it("clicking a place lists its linked units as deep links", async () => {
    const view = await loadView(frozenClient(), { ...defaultState(), path: "map" });
    const collection = frozen["/api/v1/guide/terezin/map"] as MapResponse;
    const busy = collection.features.find((f) => f.properties.linkedUnitCount > 0)!;
    for (const unitId of busy.properties.linkedUnits) {
      expect(view.html).toContain(`unit=${encodeURIComponent(unitId)}`);
    }
  });
});

describe("timeline view", () => {
  it("issues the matching from/to request for the state", async () => {
    const log: string[] = [];
    await loadView(frozenClient(log), {
      ...defaultState(), path: "timeline", from: "1945-01", to: "1945-12",
    });
    expect(log).toEqual(["GET /api/v1/guide/terezin/timeline?from=1945-01&to=1945-12"]);
  });

  it("renders events in server order with their linked units", async () => {
    const view = await loadView(frozenClient(), { ...defaultState(), path: "timeline" });
    const events = frozen[
      "/api/v1/guide/terezin/timeline?from=1941&to=1946"
    ] as TimelineEvent[];
    let cursor = -1;
    for (const event of events) {
      const position = view.html.indexOf(`<time>${event.when}</time>`);
      expect(position).toBeGreaterThan(cursor);
      cursor = position;
      for (const unitId of event.linkedUnits) {
        expect(view.html).toContain(`unit=${encodeURIComponent(unitId)}`);
      }
    }
  });

  it("range form carries the current state", async () => {
    const view = await loadView(frozenClient(), {
      ...defaultState(), path: "timeline", from: "1945-01", to: "1945-12",
    });
    expect(view.html).toContain(`<input name="from" value="1945-01">`);
    expect(view.html).toContain(`<input name="to" value="1945-12">`);
  });
});

describe("person view", () => {
  it("renders the biography with linked unit deep links", async () => {
    const view = await loadView(frozenClient(), {
      ...defaultState(), path: "person", person: "per-scheck",
    });
    expect(view.html).toContain("Zeev Scheck");
    expect(view.html).toContain("documentation initiative");
    expect(view.html).toContain(encodeURIComponent("jmp/terezin/docproject"));
  });
});

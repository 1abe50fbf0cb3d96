// View dispatch: one server round-trip per state, rendered to HTML. Pure
// with respect to the DOM so the contract tests can run it in Node against
// frozen responses.

import { ApiClient, ApiRequestError } from "./api.js";
import {
  renderBiography,
  renderError,
  renderMap,
  renderSearch,
  renderTimeline,
  renderUnit,
} from "./render.js";
import { ViewState, searchParams } from "./state.js";

export interface View {
  title: string;
  html: string;
}

/** Empty queries are not sent to the server. */
export function shouldFetchSearch(state: ViewState): boolean {
  return state.query.trim().length > 0;
}

export async function loadView(client: ApiClient, state: ViewState): Promise<View> {
  try {
    switch (state.path) {
      case "unit": {
        if (!state.unit) return { title: "No unit selected", html: renderError("no-unit", "Pick a unit from a hit list.") };
        const unit = await client.unit(state.unit);
        return { title: String(unit.properties["title"] ?? unit.globalId), html: renderUnit(state, unit) };
      }
      case "map": {
        const collection = await client.guideMap(state.guide);
        return { title: `Map of ${state.guide}`, html: renderMap(state, collection) };
      }
      case "timeline": {
        const events = await client.guideTimeline(state.guide, state.from, state.to);
        return { title: `Timeline of ${state.guide}`, html: renderTimeline(state, events) };
      }
      case "person": {
        if (!state.person) return { title: "No person selected", html: renderError("no-person", "Pick a person.") };
        const biography = await client.biography(state.guide, state.person);
        return { title: biography.person.personId, html: renderBiography(state, biography) };
      }
      default: {
        if (!shouldFetchSearch(state)) {
          return {
            title: "Search",
            html: `<div class="search-view empty"><p>Enter a query to search the integrated descriptions.</p></div>`,
          };
        }
        const result = await client.search(searchParams(state));
        return { title: `Search: ${state.query}`, html: renderSearch(state, result) };
      }
    }
  } catch (error) {
    if (error instanceof ApiRequestError) {
      return { title: error.body.code, html: renderError(error.body.code, error.body.message) };
    }
    throw error;
  }
}

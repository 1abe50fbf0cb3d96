// Deep-linkable view state: every view is reproducible from its URL alone,
// so research trails can be cited and shared. The codec round-trips and the
// facet helpers never mutate, which keeps history navigation predictable.

export type AccessPath =
  | "search"
  | "unit"
  | "map"
  | "timeline"
  | "person"
  | "keyword-tree"
  | "department-tree";

export interface ViewState {
  path: AccessPath;
  query: string;
  languages: string[];
  facets: Record<string, string[]>;
  page: number;
  unit: string | null;
  person: string | null;
  guide: string;
  from: string;
  to: string;
}

export const DEFAULT_GUIDE = "terezin";
export const DEFAULT_LANGUAGES = ["en", "de", "cs"];
const DEFAULT_RANGE = { from: "1941", to: "1946" };

export function defaultState(): ViewState {
  return {
    path: "search",
    query: "",
    languages: [...DEFAULT_LANGUAGES],
    facets: {},
    page: 1,
    unit: null,
    person: null,
    guide: DEFAULT_GUIDE,
    from: DEFAULT_RANGE.from,
    to: DEFAULT_RANGE.to,
  };
}

export function encodeFacets(facets: Record<string, string[]>): string {
  const pairs: string[] = [];
  for (const name of Object.keys(facets).sort()) {
    for (const value of facets[name] ?? []) {
      pairs.push(`${name}:${value}`);
    }
  }
  return pairs.join(",");
}

export function decodeFacets(encoded: string): Record<string, string[]> {
  const facets: Record<string, string[]> = {};
  for (const pair of encoded.split(",")) {
    if (!pair.includes(":")) continue;
    const [name, ...rest] = pair.split(":");
    const value = rest.join(":");
    if (!name || !value) continue;
    (facets[name] ??= []).push(value);
  }
  return facets;
}

export function encodeState(state: ViewState): string {
  const params = new URLSearchParams();
  if (state.path !== "search") params.set("view", state.path);
  if (state.query) params.set("q", state.query);
  if (state.languages.join(",") !== DEFAULT_LANGUAGES.join(",")) {
    params.set("lang", state.languages.join(","));
  }
  const facets = encodeFacets(state.facets);
  if (facets) params.set("facets", facets);
  if (state.page > 1) params.set("page", String(state.page));
  if (state.unit) params.set("unit", state.unit);
  if (state.person) params.set("person", state.person);
  if (state.guide !== DEFAULT_GUIDE) params.set("guide", state.guide);
  if (state.from !== DEFAULT_RANGE.from) params.set("from", state.from);
  if (state.to !== DEFAULT_RANGE.to) params.set("to", state.to);
  return params.toString();
}

const PATHS: AccessPath[] = [
  "search", "unit", "map", "timeline", "person", "keyword-tree", "department-tree",
];

export function decodeState(search: string): ViewState {
  const params = new URLSearchParams(search.startsWith("?") ? search.slice(1) : search);
  const state = defaultState();
  const view = params.get("view");
  if (view && (PATHS as string[]).includes(view)) {
    state.path = view as AccessPath;
  }
  state.query = params.get("q") ?? "";
  const lang = params.get("lang");
  if (lang !== null) {
    state.languages = lang.split(",").filter((code) => code.length > 0);
  }
  state.facets = decodeFacets(params.get("facets") ?? "");
  const page = Number(params.get("page") ?? "1");
  state.page = Number.isInteger(page) && page >= 1 ? page : 1;
  state.unit = params.get("unit");
  state.person = params.get("person");
  state.guide = params.get("guide") ?? DEFAULT_GUIDE;
  state.from = params.get("from") ?? DEFAULT_RANGE.from;
  state.to = params.get("to") ?? DEFAULT_RANGE.to;
  if (state.unit && view === null) state.path = "unit";
  if (state.person && view === null) state.path = "person";
  return state;
}

export function withFacet(state: ViewState, name: string, value: string): ViewState {
  const facets: Record<string, string[]> = {};
  for (const [key, values] of Object.entries(state.facets)) {
    facets[key] = [...values];
  }
  const values = facets[name] ?? [];
  if (!values.includes(value)) {
    facets[name] = [...values, value];
  }
  return { ...state, facets, page: 1 };
}

export function withoutFacet(state: ViewState, name: string, value: string): ViewState {
  const facets: Record<string, string[]> = {};
  for (const [key, values] of Object.entries(state.facets)) {
    const kept = key === name ? values.filter((v) => v !== value) : [...values];
    if (kept.length > 0) facets[key] = kept;
  }
  return { ...state, facets, page: 1 };
}

export function openUnit(state: ViewState, unitGlobalId: string): ViewState {
  return { ...state, path: "unit", unit: unitGlobalId };
}

/** The canonical API request parameters for a search state. */
export function searchParams(state: ViewState): Record<string, string> {
  const params: Record<string, string> = { q: state.query };
  if (state.languages.length > 0) params.lang = state.languages.join(",");
  const facets = encodeFacets(state.facets);
  if (facets) params.facets = facets;
  if (state.page > 1) params.page = String(state.page);
  return params;
}

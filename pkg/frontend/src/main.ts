// DOM bootstrap: URL -> state -> fetch -> render, with history integration.
// In-flight requests are abandoned when the state changes (latest wins).

import { ApiClient } from "./api.js";
import { loadView, shouldFetchSearch } from "./app.js";
import { decodeState, encodeState, ViewState } from "./state.js";

const client = new ApiClient("");
let generation = 0;

function mount(): HTMLElement {
  const element = document.getElementById("app");
  if (!element) throw new Error("missing #app mount point");
  return element;
}

async function render(state: ViewState): Promise<void> {
  const ticket = ++generation;
  const view = await loadView(client, state);
  if (ticket !== generation) return; // a newer navigation superseded this one
  document.title = `nexus — ${view.title}`;
  mount().innerHTML = view.html;
  syncChrome(state);
}

function syncChrome(state: ViewState): void {
  const query = document.querySelector<HTMLInputElement>("#query");
  if (query) query.value = state.query;
  for (const link of document.querySelectorAll<HTMLAnchorElement>("nav.paths a")) {
    link.classList.toggle("active", link.dataset["path"] === state.path);
  }
}

function navigate(state: ViewState, push = true): void {
  const url = `?${encodeState(state)}`;
  if (push) {
    history.pushState(null, "", url);
  } else {
    history.replaceState(null, "", url);
  }
  void render(state);
}

function currentState(): ViewState {
  return decodeState(window.location.search);
}

window.addEventListener("popstate", () => void render(currentState()));

document.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;
  const anchor = target.closest<HTMLAnchorElement>("a[data-nav]");
  if (anchor) {
    event.preventDefault();
    navigate(decodeState(anchor.getAttribute("href") ?? ""));
    return;
  }
  const pathLink = target.closest<HTMLAnchorElement>("nav.paths a[data-path]");
  if (pathLink) {
    event.preventDefault();
    const state = currentState();
    navigate({ ...state, path: (pathLink.dataset["path"] ?? "search") as ViewState["path"] });
  }
});

document.addEventListener("submit", (event) => {
  const form = event.target as HTMLFormElement;
  if (form.id === "search-form") {
    event.preventDefault();
    const state = currentState();
    const query = (form.querySelector("#query") as HTMLInputElement).value;
    const next = { ...state, path: "search" as const, query, page: 1 };
    if (!shouldFetchSearch(next)) return; // client-side validation: no request
    navigate(next);
  } else if (form.dataset["role"] === "timeline-range") {
    event.preventDefault();
    const state = currentState();
    const from = (form.elements.namedItem("from") as HTMLInputElement).value;
    const to = (form.elements.namedItem("to") as HTMLInputElement).value;
    navigate({ ...state, path: "timeline", from, to });
  } else if (form.classList.contains("annotate")) {
    event.preventDefault();
    const note = (form.elements.namedItem("note") as HTMLTextAreaElement).value.trim();
    const author = (form.elements.namedItem("author") as HTMLInputElement).value.trim();
    if (!note) return;
    const targetId = form.dataset["target"] ?? "";
    void client
      .createAnnotation(targetId, { type: "textualNote", value: note }, author || "anonymous")
      .then(() => render(currentState())); // re-fetch: the note shows as proposed
  }
});

void render(currentState());

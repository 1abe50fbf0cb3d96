// Pure HTML-string renderers. Every displayed number comes verbatim from an
// API response; nothing is recomputed client-side. Internal navigation links
// carry data-nav with the encoded target state, so any view is reachable
// (and reproducible) through a URL.

import type {
  BiographyResponse,
  MapResponse,
  SearchResponse,
  TimelineEvent,
  UnitResponse,
} from "./api.js";
import { ViewState, encodeState, openUnit, withFacet, withoutFacet } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export function navLink(state: ViewState, label: string, cssClass = ""): string {
  const href = `?${encodeState(state)}`;
  const classAttr = cssClass ? ` class="${cssClass}"` : "";
  return `<a${classAttr} data-nav href="${escapeHtml(href)}">${escapeHtml(label)}</a>`;
}

function unitLink(state: ViewState, unitGlobalId: string, label?: string): string {
  return navLink(openUnit(state, unitGlobalId), label ?? unitGlobalId, "unit-link");
}

export function renderTrace(expansion: SearchResponse["appliedExpansion"]): string {
  const rows = expansion.trace
    .map((entry) => {
      const concept = entry.conceptId ? ` (${escapeHtml(entry.conceptId)})` : "";
      return `<li class="trace-entry"><strong>${escapeHtml(entry.expandedTerm)}</strong>` +
        ` &larr; ${escapeHtml(entry.via)}${concept} of &ldquo;` +
        `${escapeHtml(entry.sourceTerm)}&rdquo;</li>`;
    })
    .join("");
  return (
    `<details class="expansion-trace" open><summary>Query expansion ` +
    `(${expansion.expandedTerms.length} terms)</summary><ul>${rows}</ul></details>`
  );
}

export function renderSearch(state: ViewState, result: SearchResponse): string {
  const hits = result.hits
    .map(
      (hit) =>
        `<li class="hit">${unitLink(state, hit.unitGlobalId)}` +
        `<span class="score">${hit.score.toFixed(4)}</span>` +
        `<span class="matched">${hit.matchedTerms.map(escapeHtml).join(", ")}</span></li>`,
    )
    .join("");
  const facetGroups = Object.entries(result.facetCounts)
    .filter(([, counts]) => Object.keys(counts).length > 0)
    .map(([name, counts]) => {
      const active = state.facets[name] ?? [];
      const rows = Object.entries(counts)
        .sort(([a], [b]) => (a < b ? -1 : 1))
        .map(([value, count]) => {
          const label = `${value} (${count})`;
          return active.includes(value)
            ? `<li class="facet active">${navLink(withoutFacet(state, name, value), `− ${label}`)}</li>`
            : `<li class="facet">${navLink(withFacet(state, name, value), label)}</li>`;
        })
        .join("");
      return `<section class="facet-group"><h3>${escapeHtml(name)}</h3><ul>${rows}</ul></section>`;
    })
    .join("");
  return (
    `<div class="search-view">` +
    `<p class="total-hits">${result.totalHits} hits</p>` +
    renderTrace(result.appliedExpansion) +
    `<aside class="facets">${facetGroups}</aside>` +
    `<ol class="hits" start="${(result.page - 1) * result.pageSize + 1}">${hits}</ol>` +
    `</div>`
  );
}

export function renderUnit(state: ViewState, unit: UnitResponse): string {
  const breadcrumb = unit.breadcrumb
    .map((ancestor) => unitLink(state, ancestor))
    .join(" &rsaquo; ");
  const title = escapeHtml(String(unit.properties["title"] ?? unit.globalId));
  const repository = unit.repository
    ? `<p class="repository">held by ${escapeHtml(unit.repository.name)}` +
      ` (${escapeHtml(unit.repository.code)})</p>`
    : "";
  const copies = unit.copies
    .map(
      (copy) =>
        `<li class="copy">also held at ${escapeHtml(copy.repository ?? "?")}: ` +
        `${unitLink(state, copy.unitGlobalId)}</li>`,
    )
    .join("");
  const children = unit.children
    .map((child) => `<li>${unitLink(state, child)}</li>`)
    .join("");
  const annotations = unit.annotations
    .map(
      (annotation) =>
        `<li class="annotation state-${escapeHtml(annotation.state)}">` +
        `<span class="state">${escapeHtml(annotation.state)}</span> ` +
        `${escapeHtml(annotation.body.type)}: ${escapeHtml(annotation.body.value)}` +
        ` <span class="author">— ${escapeHtml(annotation.author)}</span></li>`,
    )
    .join("");
  const fieldRows = ["level", "datesOfCreation", "scopeContent", "extent", "provenanceNote"]
    .map((field) => {
      const value = unit.properties[field];
      if (value === undefined || value === "" || (Array.isArray(value) && value.length === 0)) {
        return "";
      }
      const text = Array.isArray(value) ? value.map(String).join("; ") : String(value);
      return `<tr><th>${escapeHtml(field)}</th><td>${escapeHtml(text)}</td></tr>`;
    })
    .join("");
  return (
    `<div class="unit-view">` +
    `<nav class="breadcrumb">${breadcrumb}</nav>` +
    `<h2>${title}</h2>` +
    repository +
    `<table class="fields">${fieldRows}</table>` +
    `<section class="copies"><h3>Copies held elsewhere (${unit.copies.length})</h3>` +
    `<ul>${copies}</ul></section>` +
    `<section class="children"><h3>Contains (${unit.children.length})</h3>` +
    `<ul>${children}</ul></section>` +
    `<section class="annotations"><h3>Annotations (${unit.annotations.length})</h3>` +
    `<ul>${annotations}</ul>` +
    `<form class="annotate" data-target="${escapeHtml(unit.globalId)}">` +
    `<textarea name="note" placeholder="Add a note for the moderators"></textarea>` +
    `<input name="author" placeholder="Your identifier">` +
    `<button type="submit">Propose annotation</button></form></section>` +
    `</div>`
  );
}

export function renderMap(state: ViewState, collection: MapResponse): string {
  const lats: number[] = [];
  const lons: number[] = [];
  for (const feature of collection.features) {
    if (feature.geometry.type === "Point") {
      lons.push(feature.geometry.coordinates[0]);
      lats.push(feature.geometry.coordinates[1]);
    }
  }
  const minLat = Math.min(...lats, 90);
  const maxLat = Math.max(...lats, -90);
  const minLon = Math.min(...lons, 180);
  const maxLon = Math.max(...lons, -180);
  const scaleX = (lon: number) =>
    maxLon === minLon ? 200 : 20 + (360 * (lon - minLon)) / (maxLon - minLon);
  const scaleY = (lat: number) =>
    maxLat === minLat ? 150 : 280 - (260 * (lat - minLat)) / (maxLat - minLat);
  const markers = collection.features
    .filter((f) => f.geometry.type === "Point")
    .map((feature) => {
      const [lon, lat] = (feature.geometry as { coordinates: [number, number] }).coordinates;
      const muted = feature.properties.linkedUnitCount === 0;
      return (
        `<circle class="place-marker${muted ? " muted" : ""}" data-place="${escapeHtml(feature.id)}"` +
        ` cx="${scaleX(lon).toFixed(1)}" cy="${scaleY(lat).toFixed(1)}" r="${muted ? 4 : 7}">` +
        `</circle>`
      );
    })
    .join("");
  const entries = collection.features
    .map((feature) => {
      const names = Object.values(feature.properties.names).flat().join(" / ");
      const muted = feature.properties.linkedUnitCount === 0;
      const units = feature.properties.linkedUnits
        .map((unitId) => `<li>${unitLink(state, unitId)}</li>`)
        .join("");
      return (
        `<details class="place${muted ? " muted" : ""}" data-place="${escapeHtml(feature.id)}">` +
        `<summary>${escapeHtml(names)} — ${feature.properties.linkedUnitCount} units</summary>` +
        `<ul class="place-units">${units}</ul></details>`
      );
    })
    .join("");
  return (
    `<div class="map-view">` +
    `<svg viewBox="0 0 400 300" class="place-map" role="img">${markers}</svg>` +
    `<p class="map-totals">${collection.placedUnits} units placed, ` +
    `${collection.unplacedUnits} without a place link</p>` +
    `<div class="places">${entries}</div></div>`
  );
}

export function renderTimeline(state: ViewState, events: TimelineEvent[]): string {
  const rows = events
    .map((event) => {
      const label = event.label["en"] ?? Object.values(event.label)[0] ?? event.eventId;
      const units = event.linkedUnits
        .map((unitId) => `<li>${unitLink(state, unitId)}</li>`)
        .join("");
      return (
        `<li class="event kind-${escapeHtml(event.kind)}">` +
        `<time>${escapeHtml(event.when ?? "")}</time> ` +
        `<strong>${escapeHtml(label)}</strong>` +
        `<ul class="event-units">${units}</ul></li>`
      );
    })
    .join("");
  return (
    `<div class="timeline-view">` +
    `<form class="range" data-role="timeline-range">` +
    `<input name="from" value="${escapeHtml(state.from)}">` +
    `<input name="to" value="${escapeHtml(state.to)}">` +
    `<button type="submit">Apply range</button></form>` +
    `<ol class="events">${rows}</ol></div>`
  );
}

export function renderBiography(state: ViewState, biography: BiographyResponse): string {
  const names = biography.person.names
    .map((name) => escapeHtml(name.text))
    .join(" / ");
  const units = biography.linkedUnits
    .map((unitId) => `<li>${unitLink(state, unitId)}</li>`)
    .join("");
  return (
    `<div class="person-view"><h2>${names}</h2>` +
    `<p class="life-dates">${escapeHtml(biography.person.lifeDates ?? "")}</p>` +
    `<p class="biography">${escapeHtml(biography.person.biography)}</p>` +
    `<section><h3>Linked units (${biography.linkedUnits.length})</h3>` +
    `<ul>${units}</ul></section></div>`
  );
}

export function renderError(code: string, message: string): string {
  return (
    `<div class="error-view"><h2>${escapeHtml(code)}</h2>` +
    `<p>${escapeHtml(message)}</p></div>`
  );
}

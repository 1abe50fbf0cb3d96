// Typed client for the portal's /api/v1 contract. Query parameters are
// serialized in sorted order so a view's request URL is canonical: the same
// ViewState always produces the same URL (and the same frozen test fixture).

export interface TraceEntry {
  expandedTerm: string;
  via: string;
  sourceTerm: string;
  conceptId: string | null;
}

export interface AppliedExpansion {
  originalTerms: string[];
  matchedConcepts: string[];
  expandedTerms: string[];
  trace: TraceEntry[];
}

export interface SearchHit {
  unitGlobalId: string;
  score: number;
  matchedTerms: string[];
}

export interface SearchResponse {
  hits: SearchHit[];
  facetCounts: Record<string, Record<string, number>>;
  totalHits: number;
  appliedExpansion: AppliedExpansion;
  page: number;
  pageSize: number;
}

export interface AnnotationBody {
  type: string;
  value: string;
  url?: string;
}

export interface Annotation {
  annotationId: string;
  targetId: string;
  body: AnnotationBody;
  author: string;
  created: string;
  state: string;
  moderatorNote: string;
}

export interface CopyLink {
  unitGlobalId: string;
  repository: string | null;
}

export interface UnitResponse {
  globalId: string;
  properties: Record<string, unknown>;
  repository: { ehriId: string; code: string; name: string } | null;
  breadcrumb: string[];
  children: string[];
  annotations: Annotation[];
  copies: CopyLink[];
}

export interface GuideResponse {
  guideId: string;
  repositories: string[];
  places: string[];
  events: string[];
  biographies: string[];
  unitCount: number;
  stats: Record<string, number>;
}

export interface MapFeature {
  type: "Feature";
  id: string;
  geometry:
    | { type: "Point"; coordinates: [number, number] }
    | { type: "Polygon"; coordinates: [number, number][][] };
  properties: {
    names: Record<string, string[]>;
    linkedUnitCount: number;
    linkedUnits: string[];
  };
}

export interface MapResponse {
  type: "FeatureCollection";
  features: MapFeature[];
  placedUnits: number;
  unplacedUnits: number;
}

export interface TimelineEvent {
  eventId: string;
  label: Record<string, string>;
  when: string | null;
  kind: string;
  linkedUnits: string[];
  persons: string[];
}

export interface BiographyResponse {
  person: {
    personId: string;
    names: { text: string; lang?: string; type?: string }[];
    lifeDates: string | null;
    biography: string;
    concordance: string[];
  };
  linkedUnits: string[];
  events: string[];
}

export interface ApiError {
  code: string;
  message: string;
  details: Record<string, unknown>;
}

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiError,
  ) {
    super(`${body.code}: ${body.message}`);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export function canonicalQuery(params: Record<string, string>): string {
  const search = new URLSearchParams();
  for (const key of Object.keys(params).sort()) {
    const value = params[key];
    if (value !== undefined && value !== "") {
      search.set(key, value);
    }
  }
  return search.toString();
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  requestUrl(path: string, params?: Record<string, string>): string {
    const query = params ? canonicalQuery(params) : "";
    return `${this.baseUrl}/api/v1${path}${query ? `?${query}` : ""}`;
  }

  private async get<T>(path: string, params?: Record<string, string>): Promise<T> {
    const response = await this.fetchImpl(this.requestUrl(path, params));
    const body = await response.json();
    if (!response.ok) {
      throw new ApiRequestError(response.status, body as ApiError);
    }
    return body as T;
  }

  private async post<T>(path: string, payload: unknown): Promise<T> {
    const response = await this.fetchImpl(this.requestUrl(path), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    const body = await response.json();
    if (!response.ok) {
      throw new ApiRequestError(response.status, body as ApiError);
    }
    return body as T;
  }

  search(params: Record<string, string>): Promise<SearchResponse> {
    return this.get("/search", params);
  }

  unit(globalId: string): Promise<UnitResponse> {
    return this.get(`/units/${globalId}`);
  }

  guide(guideId: string): Promise<GuideResponse> {
    return this.get(`/guide/${guideId}`);
  }

  guideMap(guideId: string): Promise<MapResponse> {
    return this.get(`/guide/${guideId}/map`);
  }

  guideTimeline(guideId: string, from: string, to: string): Promise<TimelineEvent[]> {
    return this.get(`/guide/${guideId}/timeline`, { from, to });
  }

  biography(guideId: string, personId: string): Promise<BiographyResponse> {
    return this.get(`/guide/${guideId}/persons/${personId}`);
  }

  createAnnotation(targetId: string, body: AnnotationBody, author: string): Promise<Annotation> {
    return this.post("/annotations", { targetId, body, author });
  }
}

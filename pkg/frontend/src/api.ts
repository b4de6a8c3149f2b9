// Typed client for the annotation service. The UI talks exclusively to
// these endpoints; there is no other persistence.

export type Decision = "include" | "exclude";

export interface EpisodeSummary {
  video_id: string;
  fixation_index: number;
  object_count: number;
  decided_count: number;
  done: boolean;
}

export interface ObjectCard {
  identity: string;
  caption: string;
}

export interface DecisionView {
  decision: Decision;
  edited_identity: string | null;
  edited_caption: string | null;
}

export interface EpisodeDetail {
  video_id: string;
  fixation_index: number;
  t_start: number;
  t_end: number;
  centroid: [number, number];
  gazed_object: ObjectCard;
  fov_objects: ObjectCard[];
  out_objects: ObjectCard[];
  media: { fov_patch?: string; clip_frames?: string[] };
  decisions?: Record<string, DecisionView>;
}

export interface DecisionIn {
  annotator_id: string;
  video_id: string;
  fixation_index: number;
  object_identity: string;
  decision: Decision;
  edited_identity?: string | null;
  edited_caption?: string | null;
}

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class AnnotationApi {
  constructor(
    private base: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(`${this.base}${path}`, init);
    if (!resp.ok) {
      let detail = resp.statusText;
      try {
        const body = await resp.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(resp.status, `${path}: ${detail}`);
    }
    return resp.json() as Promise<T>;
  }

  listEpisodes(annotatorId: string): Promise<{ episodes: EpisodeSummary[] }> {
    return this.request(`/api/episodes?annotator_id=${encodeURIComponent(annotatorId)}`);
  }

  getEpisode(videoId: string, fixationIndex: number, annotatorId: string): Promise<EpisodeDetail> {
    const q = `annotator_id=${encodeURIComponent(annotatorId)}`;
    return this.request(`/api/episodes/${encodeURIComponent(videoId)}/${fixationIndex}?${q}`);
  }

  submitDecision(decision: DecisionIn): Promise<{ stored_id: string }> {
    return this.request(`/api/decisions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(decision),
    });
  }

  stats(): Promise<unknown> {
    return this.request(`/api/stats`);
  }

  verified(videoId: string): Promise<{ verified: boolean; entries: unknown[] }> {
    return this.request(`/api/verified/${encodeURIComponent(videoId)}`);
  }

  async instructions(): Promise<string> {
    const resp = await this.fetchFn(`${this.base}/api/instructions`);
    if (!resp.ok) throw new ApiError(resp.status, "instructions unavailable");
    return resp.text();
  }
}

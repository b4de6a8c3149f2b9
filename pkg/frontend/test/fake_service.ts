// In-memory stand-in implementing the service's semantics (last-write-wins
// per annotator/fixation/object) behind a fetch-compatible function.

import type { DecisionIn, DecisionView, EpisodeDetail } from "../src/api.js";

export class FakeService {
  records = new Map<string, DecisionIn>();
  failNextPosts = 0;

  constructor(private episodes: EpisodeDetail[]) {}

  key(r: DecisionIn): string {
    return `${r.annotator_id}|${r.video_id}|${r.fixation_index}|${r.object_identity}`;
  }

  decisionsFor(videoId: string, fixationIndex: number, annotator: string): Record<string, DecisionView> {
    const out: Record<string, DecisionView> = {};
    for (const r of this.records.values()) {
      if (r.video_id === videoId && r.fixation_index === fixationIndex && r.annotator_id === annotator) {
        out[r.object_identity] = {
          decision: r.decision,
          edited_identity: r.edited_identity ?? null,
          edited_caption: r.edited_caption ?? null,
        };
      }
    }
    return out;
  }

  fetch = async (url: string, init?: RequestInit): Promise<Response> => {
    const json = (body: unknown, status = 200) =>
      new Response(JSON.stringify(body), { status, headers: { "Content-Type": "application/json" } });

    const u = new URL(url, "http://fake");
    if (u.pathname === "/api/episodes") {
      const annotator = u.searchParams.get("annotator_id") ?? "";
      return json({
        episodes: this.episodes.map((e) => {
          const objects =
            1 + e.fov_objects.length + e.out_objects.length;
          const decided = Object.keys(this.decisionsFor(e.video_id, e.fixation_index, annotator)).length;
          return {
            video_id: e.video_id,
            fixation_index: e.fixation_index,
            object_count: objects,
            decided_count: decided,
            done: decided === objects,
          };
        }),
      });
    }
    const epMatch = u.pathname.match(/^\/api\/episodes\/([^/]+)\/(\d+)$/);
    if (epMatch) {
      const ep = this.episodes.find(
        (e) => e.video_id === epMatch[1] && e.fixation_index === Number(epMatch[2]),
      );
      if (!ep) return json({ detail: "unknown episode" }, 404);
      const annotator = u.searchParams.get("annotator_id") ?? "";
      return json({ ...ep, decisions: this.decisionsFor(ep.video_id, ep.fixation_index, annotator) });
    }
    if (u.pathname === "/api/decisions" && init?.method === "POST") {
      if (this.failNextPosts > 0) {
        this.failNextPosts -= 1;
        return json({ detail: "boom" }, 503);
      }
      const body = JSON.parse(String(init.body)) as DecisionIn;
      const ep = this.episodes.find(
        (e) => e.video_id === body.video_id && e.fixation_index === body.fixation_index,
      );
      if (!ep) return json({ detail: "unknown fixation" }, 422);
      if (
        (body.edited_identity || body.edited_caption) &&
        body.object_identity !== ep.gazed_object.identity
      ) {
        return json({ detail: "edits are only permitted on the gazed object" }, 422);
      }
      this.records.set(this.key(body), body);
      return json({ stored_id: `rec-${this.records.size}` });
    }
    return json({ detail: `unhandled ${u.pathname}` }, 404);
  };
}

export function makeEpisodes(): EpisodeDetail[] {
  return [
    {
      video_id: "vid",
      fixation_index: 0,
      t_start: 2,
      t_end: 5,
      centroid: [100, 100],
      gazed_object: { identity: "cup", caption: "a blue cup" },
      fov_objects: [{ identity: "knife", caption: "a knife" }],
      out_objects: [{ identity: "pan", caption: "a pan" }],
      media: {},
    },
    {
      video_id: "vid",
      fixation_index: 1,
      t_start: 8,
      t_end: 11,
      centroid: [150, 90],
      gazed_object: { identity: "kettle", caption: "a yellow kettle" },
      fov_objects: [],
      out_objects: [{ identity: "pan", caption: "a pan" }],
      media: {},
    },
  ];
}

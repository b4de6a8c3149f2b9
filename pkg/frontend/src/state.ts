// Review state for one episode: per-card decision drafts, gazed-object
// edits, and a dirty flag guarding navigation. Keyboard shortcuts drive
// the exact same mutations as pointer clicks, so both produce identical
// submitted records.

import type { Decision, DecisionIn, DecisionView, EpisodeDetail } from "./api.js";

export type CardKind = "gazed" | "fov" | "out";

export interface CardState {
  identity: string;
  caption: string;
  kind: CardKind;
  decision: Decision | null;
  editedIdentity: string | null;
  editedCaption: string | null;
  saved: boolean; // true when the current state mirrors the server
}

export class EpisodeReview {
  readonly videoId: string;
  readonly fixationIndex: number;
  readonly cards: CardState[];
  cursor = 0;

  constructor(episode: EpisodeDetail) {
    this.videoId = episode.video_id;
    this.fixationIndex = episode.fixation_index;
    this.cards = [
      card(episode.gazed_object.identity, episode.gazed_object.caption, "gazed"),
      ...episode.fov_objects.map((o) => card(o.identity, o.caption, "fov")),
      ...episode.out_objects.map((o) => card(o.identity, o.caption, "out")),
    ];
    if (episode.decisions) this.reconcile(episode.decisions);
  }

  /** Adopt the server's live view; cards it covers become clean. */
  reconcile(decisions: Record<string, DecisionView>): void {
    for (const c of this.cards) {
      const d = decisions[c.identity];
      if (!d) continue;
      c.decision = d.decision;
      c.editedIdentity = d.edited_identity;
      c.editedCaption = d.edited_caption;
      c.saved = true;
    }
  }

  get current(): CardState {
    return this.cards[this.cursor];
  }

  get dirty(): boolean {
    return this.cards.some((c) => !c.saved && (c.decision !== null || c.editedIdentity !== null || c.editedCaption !== null));
  }

  get complete(): boolean {
    return this.cards.every((c) => c.decision !== null);
  }

  decide(identity: string, decision: Decision): void {
    const c = this.find(identity);
    c.decision = decision;
    c.saved = false;
  }

  editGazed(editedIdentity: string | null, editedCaption: string | null): void {
    const c = this.cards[0];
    if (c.kind !== "gazed") throw new Error("first card must be the gazed object");
    c.editedIdentity = normalizeEdit(editedIdentity, c.identity);
    c.editedCaption = normalizeEdit(editedCaption, c.caption);
    c.saved = false;
  }

  /** Keyboard entry point: i=include, x=exclude, n/arrow = move cursor. */
  key(k: string): "moved" | "decided" | "next-episode" | null {
    if (k === "i" || k === "x") {
      this.decide(this.current.identity, k === "i" ? "include" : "exclude");
      if (this.cursor < this.cards.length - 1) this.cursor += 1;
      return "decided";
    }
    if (k === "j" || k === "ArrowDown") {
      this.cursor = Math.min(this.cursor + 1, this.cards.length - 1);
      return "moved";
    }
    if (k === "k" || k === "ArrowUp") {
      this.cursor = Math.max(this.cursor - 1, 0);
      return "moved";
    }
    if (k === "n") return "next-episode";
    return null;
  }

  /** Records for every card with unsaved local state. */
  pendingRecords(annotatorId: string): DecisionIn[] {
    const out: DecisionIn[] = [];
    for (const c of this.cards) {
      if (c.saved || c.decision === null) continue;
      const rec: DecisionIn = {
        annotator_id: annotatorId,
        video_id: this.videoId,
        fixation_index: this.fixationIndex,
        object_identity: c.identity,
        decision: c.decision,
      };
      if (c.kind === "gazed") {
        rec.edited_identity = c.editedIdentity;
        rec.edited_caption = c.editedCaption;
      }
      out.push(rec);
    }
    return out;
  }

  markSaved(identities: string[]): void {
    for (const id of identities) this.find(id).saved = true;
  }

  private find(identity: string): CardState {
    const c = this.cards.find((x) => x.identity === identity);
    if (!c) throw new Error(`no card for ${identity}`);
    return c;
  }
}

function card(identity: string, caption: string, kind: CardKind): CardState {
  return { identity, caption, kind, decision: null, editedIdentity: null, editedCaption: null, saved: false };
}

function normalizeEdit(value: string | null, original: string): string | null {
  if (value === null) return null;
  const trimmed = value.trim();
  if (!trimmed || trimmed === original) return null;
  return trimmed;
}

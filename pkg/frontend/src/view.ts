// DOM rendering and event wiring. One App instance owns the episode list,
// the open review, and the submit flow (with retry on transport failure;
// drafts survive).

import { AnnotationApi, type EpisodeSummary } from "./api.js";
import { EpisodeReview } from "./state.js";

export class App {
  review: EpisodeReview | null = null;
  episodes: EpisodeSummary[] = [];
  status = "";

  constructor(
    private root: HTMLElement,
    private api: AnnotationApi,
    public annotatorId: string,
    private confirmFn: (msg: string) => boolean = (msg) => window.confirm(msg),
  ) {}

  async start(): Promise<void> {
    await this.refreshEpisodes();
    this.render();
    document.addEventListener("keydown", (ev) => this.onKey(ev));
  }

  async refreshEpisodes(): Promise<void> {
    this.episodes = (await this.api.listEpisodes(this.annotatorId)).episodes;
  }

  async openEpisode(videoId: string, fixationIndex: number): Promise<void> {
    if (this.review?.dirty && !this.confirmFn("Discard unsaved decisions?")) return;
    const detail = await this.api.getEpisode(videoId, fixationIndex, this.annotatorId);
    this.review = new EpisodeReview(detail);
    this.status = "";
    this.render();
  }

  async submit(): Promise<void> {
    if (!this.review) return;
    const records = this.review.pendingRecords(this.annotatorId);
    const saved: string[] = [];
    try {
      for (const rec of records) {
        await this.api.submitDecision(rec);
        saved.push(rec.object_identity);
      }
    } catch (err) {
      this.review.markSaved(saved);
      this.status = `submit failed (${String(err)}); drafts kept, press Submit to retry`;
      this.render();
      return;
    }
    this.review.markSaved(saved);
    // read-your-writes: refetch and reconcile with the server's live view
    const detail = await this.api.getEpisode(this.review.videoId, this.review.fixationIndex, this.annotatorId);
    this.review.reconcile(detail.decisions ?? {});
    await this.refreshEpisodes();
    this.status = `saved ${saved.length} decision(s)`;
    this.render();
  }

  async nextEpisode(): Promise<void> {
    if (!this.review) return;
    const idx = this.episodes.findIndex(
      (e) => e.video_id === this.review!.videoId && e.fixation_index === this.review!.fixationIndex,
    );
    const next = this.episodes[idx + 1];
    if (next) await this.openEpisode(next.video_id, next.fixation_index);
  }

  onKey(ev: KeyboardEvent): void {
    if (!this.review) return;
    const target = ev.target as HTMLElement | null;
    if (target && (target.tagName === "INPUT" || target.tagName === "TEXTAREA")) return;
    const action = this.review.key(ev.key);
    if (action === "next-episode") void this.nextEpisode();
    else if (action) this.render();
  }

  render(): void {
    this.root.textContent = "";
    this.root.appendChild(this.renderSidebar());
    this.root.appendChild(this.review ? this.renderReview() : this.renderWelcome());
  }

  private renderSidebar(): HTMLElement {
    const aside = el("aside", "sidebar");
    const done = this.episodes.filter((e) => e.done).length;
    aside.appendChild(el("h2", "", `Episodes (${done}/${this.episodes.length} done)`));
    const list = el("ul", "episode-list");
    for (const ep of this.episodes) {
      const li = el("li", ep.done ? "episode done" : "episode");
      li.dataset.episode = `${ep.video_id}/${ep.fixation_index}`;
      li.textContent = `${ep.video_id} #${ep.fixation_index} (${ep.decided_count}/${ep.object_count})`;
      li.addEventListener("click", () => void this.openEpisode(ep.video_id, ep.fixation_index));
      list.appendChild(li);
    }
    aside.appendChild(list);
    return aside;
  }

  private renderWelcome(): HTMLElement {
    const main = el("main", "review");
    main.appendChild(el("p", "", "Pick an episode to review. Keys: i include, x exclude, j/k move, n next."));
    return main;
  }

  private renderReview(): HTMLElement {
    const review = this.review!;
    const main = el("main", "review");
    main.appendChild(el("h2", "", `${review.videoId} — fixation #${review.fixationIndex}`));

    const strip = el("div", "filmstrip");
    const detailMedia = review.cards.length ? this.mediaUrls() : [];
    for (const url of detailMedia) {
      const img = document.createElement("img");
      img.src = url;
      img.alt = "clip frame";
      strip.appendChild(img);
    }
    main.appendChild(strip);

    for (const [i, card] of review.cards.entries()) {
      main.appendChild(this.renderCard(i, card));
    }

    const bar = el("div", "actions");
    const submit = document.createElement("button");
    submit.id = "submit";
    submit.textContent = "Submit";
    submit.disabled = !review.dirty;
    submit.addEventListener("click", () => void this.submit());
    bar.appendChild(submit);
    const next = document.createElement("button");
    next.id = "next";
    next.textContent = "Next episode";
    next.addEventListener("click", () => void this.nextEpisode());
    bar.appendChild(next);
    main.appendChild(bar);
    if (this.status) main.appendChild(el("p", "status", this.status));
    return main;
  }

  private mediaUrls(): string[] {
    // previews are filmstrip frames served by the service; video playback
    // is not assumed
    const ep = this.episodes.find(
      (e) => e.video_id === this.review!.videoId && e.fixation_index === this.review!.fixationIndex,
    );
    if (!ep) return [];
    const base = `/media/${this.review!.videoId}`;
    const tag = String(this.review!.fixationIndex).padStart(4, "0");
    return [0, 1, 2, 3].map((k) => `${base}/fix${tag}_clip${k}.png`);
  }

  private renderCard(index: number, card: import("./state.js").CardState): HTMLElement {
    const review = this.review!;
    const kinds = { gazed: "Gazed object", fov: "In FOV", out: "Out of FOV" } as const;
    const div = el("div", `card ${card.kind}${index === review.cursor ? " cursor" : ""}`);
    div.dataset.identity = card.identity;
    div.appendChild(el("span", "kind", kinds[card.kind]));
    div.appendChild(el("strong", "identity", card.editedIdentity ?? card.identity));
    div.appendChild(el("p", "caption", card.editedCaption ?? card.caption));

    for (const decision of ["include", "exclude"] as const) {
      const btn = document.createElement("button");
      btn.className = `decide ${decision}${card.decision === decision ? " active" : ""}`;
      btn.textContent = decision;
      btn.addEventListener("click", () => {
        review.decide(card.identity, decision);
        this.render();
      });
      div.appendChild(btn);
    }

    if (card.kind === "gazed") {
      // only the gazed object is editable; other cards have no controls
      const idInput = document.createElement("input");
      idInput.className = "edit-identity";
      idInput.value = card.editedIdentity ?? card.identity;
      idInput.addEventListener("change", () => {
        review.editGazed(idInput.value, capInput.value);
      });
      const capInput = document.createElement("textarea");
      capInput.className = "edit-caption";
      capInput.value = card.editedCaption ?? card.caption;
      capInput.addEventListener("change", () => {
        review.editGazed(idInput.value, capInput.value);
      });
      div.appendChild(idInput);
      div.appendChild(capInput);
    }
    return div;
  }
}

function el(tag: string, className = "", text = ""): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

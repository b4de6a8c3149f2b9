import { describe, expect, it } from "vitest";

import type { EpisodeDetail } from "../src/api.js";
import { EpisodeReview } from "../src/state.js";

function episode(): EpisodeDetail {
  return {
    video_id: "vid",
    fixation_index: 2,
    t_start: 10,
    t_end: 13,
    centroid: [100, 100],
    gazed_object: { identity: "cup", caption: "a blue cup" },
    fov_objects: [{ identity: "knife", caption: "a knife" }],
    out_objects: [{ identity: "pan", caption: "a pan" }],
    media: {},
  };
}

describe("EpisodeReview", () => {
  it("orders cards gazed, fov, out", () => {
    const r = new EpisodeReview(episode());
    expect(r.cards.map((c) => c.kind)).toEqual(["gazed", "fov", "out"]);
    expect(r.cards[0].identity).toBe("cup");
  });

  it("keyboard decisions equal pointer decisions", () => {
    const viaKeys = new EpisodeReview(episode());
    viaKeys.key("i"); // include cup, cursor moves
    viaKeys.key("x"); // exclude knife
    viaKeys.key("i"); // include pan

    const viaPointer = new EpisodeReview(episode());
    viaPointer.decide("cup", "include");
    viaPointer.decide("knife", "exclude");
    viaPointer.decide("pan", "include");

    expect(viaKeys.pendingRecords("a1")).toEqual(viaPointer.pendingRecords("a1"));
  });

  it("edits apply only to the gazed object and ride its record", () => {
    const r = new EpisodeReview(episode());
    r.decide("cup", "include");
    r.editGazed("teacup", "a chipped teacup");
    const records = r.pendingRecords("a1");
    expect(records).toHaveLength(1);
    expect(records[0]).toMatchObject({
      object_identity: "cup",
      edited_identity: "teacup",
      edited_caption: "a chipped teacup",
    });
    // non-gazed records never carry edit fields
    r.decide("knife", "include");
    const knifeRec = r.pendingRecords("a1").find((x) => x.object_identity === "knife")!;
    expect("edited_identity" in knifeRec).toBe(false);
  });

  it("unchanged edit text normalizes to null", () => {
    const r = new EpisodeReview(episode());
    r.decide("cup", "include");
    r.editGazed("cup", "a blue cup"); // same as original
    expect(r.pendingRecords("a1")[0].edited_identity).toBeNull();
    expect(r.pendingRecords("a1")[0].edited_caption).toBeNull();
  });

  it("dirty until saved, clean after reconcile", () => {
    const r = new EpisodeReview(episode());
    expect(r.dirty).toBe(false);
    r.decide("pan", "exclude");
    expect(r.dirty).toBe(true);
    r.markSaved(["pan"]);
    expect(r.dirty).toBe(false);
  });

  it("server decisions arrive pre-reconciled", () => {
    const detail = episode();
    detail.decisions = { cup: { decision: "include", edited_identity: null, edited_caption: "better" } };
    const r = new EpisodeReview(detail);
    expect(r.cards[0].decision).toBe("include");
    expect(r.cards[0].editedCaption).toBe("better");
    expect(r.dirty).toBe(false);
    expect(r.complete).toBe(false); // knife and pan undecided
  });

  it("cursor movement clamps", () => {
    const r = new EpisodeReview(episode());
    r.key("k");
    expect(r.cursor).toBe(0);
    r.key("j");
    r.key("j");
    r.key("j");
    expect(r.cursor).toBe(2);
    expect(r.key("n")).toBe("next-episode");
  });
});

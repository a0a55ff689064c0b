import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { MapController, applyEditsToDocument } from "../src/controller.js";
import type { EditOp, InferenceResultJson, MapDocument } from "../src/types.js";
import { FakeService } from "./fakeService.js";
import diamond from "./fixtures/diamond.json";

const WEIGHT_EDIT: EditOp[] = [
  { op: "set_weight", edge: "inf:c->t:inverse", weight: 0.1 },
];

function makeService(overrides: Partial<ConstructorParameters<typeof FakeService>[0]> = {}) {
  return new FakeService({
    mapId: "diamond01",
    document: diamond.map as MapDocument,
    baseResult: diamond.result as InferenceResultJson,
    whatifResults: {
      [JSON.stringify(WEIGHT_EDIT)]:
        diamond.result_after_weight_edit as InferenceResultJson,
    },
    ...overrides,
  });
}

describe("MapController", () => {
  let service: FakeService;
  let controller: MapController;

  beforeEach(async () => {
    service = makeService();
    controller = new MapController(new ApiClient("", service.fetch), "diamond01");
    await controller.load();
  });

  it("loads the map and exposes the verdict", () => {
    const vm = controller.viewModel()!;
    expect(vm.nodes).toHaveLength(4);
    expect(vm.banner!.direction).toBe("decreasing");
    expect(controller.state.revision).toBe(0);
  });

  it("weight preview issues a whatif round trip and updates the banner", async () => {
    await controller.previewWeight("inf:c->t:inverse", 0.1);
    expect(service.requestsTo("POST", "/whatif")).toHaveLength(1);
    const vm = controller.viewModel()!;
    expect(vm.banner!.direction).toBe("increasing");
    // the working document reflects the slider position
    const edge = controller.state.workingDoc!.edges.find(
      (e) => e.id === "inf:c->t:inverse",
    )!;
    expect(edge.weight).toBe(0.1);
    expect(controller.state.previewing).toBe(true);
  });

  it("preview never mutates the persisted map", async () => {
    await controller.previewWeight("inf:c->t:inverse", 0.1);
    const persisted = service.persistedDocument.edges.find(
      (e) => e.id === "inf:c->t:inverse",
    )!;
    expect(persisted.weight).toBe(0.9);
    expect(service.currentRevision).toBe(0);
    expect(service.requestsTo("PATCH", "/maps/diamond01")).toHaveLength(0);
  });

  it("discard refetches and restores the committed state", async () => {
    await controller.previewWeight("inf:c->t:inverse", 0.1);
    await controller.discard();
    expect(controller.state.previewing).toBe(false);
    expect(controller.viewModel()!.banner!.direction).toBe("decreasing");
    const edge = controller.state.workingDoc!.edges.find(
      (e) => e.id === "inf:c->t:inverse",
    )!;
    expect(edge.weight).toBe(0.9);
  });

  it("commit PATCHes with the expected revision and bumps it", async () => {
    await controller.previewWeight("inf:c->t:inverse", 0.1);
    const committed = await controller.commit();
    expect(committed).toBe(true);
    const patches = service.requestsTo("PATCH", "/maps/diamond01");
    expect(patches).toHaveLength(1);
    expect((patches[0].body as { expected_revision: number }).expected_revision).toBe(0);
    expect(controller.state.revision).toBe(1);
    expect(controller.state.previewing).toBe(false);
    expect(service.persistedDocument.edges.find(
      (e) => e.id === "inf:c->t:inverse",
    )!.weight).toBe(0.1);
  });

  it("conflict on commit informs the user and refetches", async () => {
    const conflicted = makeService({ failPatchWith409: true });
    const c = new MapController(new ApiClient("", conflicted.fetch), "diamond01");
    await c.load();
    await c.previewWeight("inf:c->t:inverse", 0.1);
    const committed = await c.commit();
    expect(committed).toBe(false);
    expect(c.state.message).toContain("conflict");
    // refetched the authoritative state
    expect(conflicted.requestsTo("GET", "/maps/diamond01").length).toBeGreaterThan(1);
    expect(c.state.previewing).toBe(false);
  });

  it("successive previews on the same edge replace, not stack", async () => {
    service = makeService({
      whatifResults: {
        [JSON.stringify(WEIGHT_EDIT)]:
          diamond.result_after_weight_edit as InferenceResultJson,
        [JSON.stringify([{ op: "set_weight", edge: "inf:c->t:inverse", weight: 0.5 }])]:
          diamond.result as InferenceResultJson,
      },
    });
    controller = new MapController(new ApiClient("", service.fetch), "diamond01");
    await controller.load();
    await controller.previewWeight("inf:c->t:inverse", 0.5);
    await controller.previewWeight("inf:c->t:inverse", 0.1);
    expect(controller.state.pendingEdits).toHaveLength(1);
    expect(controller.state.pendingEdits[0]).toEqual(WEIGHT_EDIT[0]);
  });
});

describe("applyEditsToDocument", () => {
  const doc = diamond.map as MapDocument;

  it("never mutates its input", () => {
    const before = JSON.stringify(doc);
    applyEditsToDocument(doc, WEIGHT_EDIT);
    expect(JSON.stringify(doc)).toBe(before);
  });

  it("remove_node cascades to incident edges and assumptions", () => {
    const out = applyEditsToDocument(doc, [{ op: "remove_node", node: "b" }]);
    expect(out.nodes.some((n) => n.id === "b")).toBe(false);
    expect(out.edges.some((e) => e.source === "b" || e.target === "b")).toBe(false);
  });

  it("clamp upserts an assumption", () => {
    const out = applyEditsToDocument(doc, [{ op: "clamp", node: "c", value: "steady" }]);
    expect(out.scenario!.assumptions).toContainEqual({ node: "c", value: "steady" });
  });
});

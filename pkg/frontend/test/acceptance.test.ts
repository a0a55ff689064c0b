// UI contract acceptance: the diamond fixture end to end against a recorded
// fake service whose responses were generated by the real engine.

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { MapController } from "../src/controller.js";
import type { EditOp, InferenceResultJson, MapDocument } from "../src/types.js";
import { FakeService } from "./fakeService.js";
import diamond from "./fixtures/diamond.json";

const SLIDER_EDIT: EditOp[] = [
  { op: "set_weight", edge: "inf:c->t:inverse", weight: 0.1 },
];

describe("UI contract on the diamond fixture", () => {
  it("renders 4 nodes, red inverse chain, decreasing banner; the slider flips "
    + "the banner via /whatif; preview never changes the persisted map", async () => {
    const service = new FakeService({
      mapId: "diamond01",
      document: diamond.map as MapDocument,
      baseResult: diamond.result as InferenceResultJson,
      whatifResults: {
        [JSON.stringify(SLIDER_EDIT)]:
          diamond.result_after_weight_edit as InferenceResultJson,
      },
    });
    const controller = new MapController(
      new ApiClient("", service.fetch), "diamond01",
    );

    // load and render
    await controller.load();
    const vm = controller.viewModel()!;
    expect(vm.nodes).toHaveLength(4);
    const inverseChain = vm.edges.filter(
      (e) => e.edge.id === "inf:a->c:direct" || e.edge.id === "inf:c->t:inverse",
    );
    expect(inverseChain).toHaveLength(2);
    for (const edge of inverseChain) {
      expect(edge.pressure).toBe("downward");
      expect(edge.color).toBe("#dc2626");
    }
    expect(vm.banner!.direction).toBe("decreasing");

    // slider: C->T weight 0.9 -> 0.1 previews through /whatif
    await controller.previewWeight("inf:c->t:inverse", 0.1);
    expect(service.requestsTo("POST", "/whatif")).toHaveLength(1);
    const flipped = controller.viewModel()!;
    expect(flipped.banner!.direction).toBe("increasing");
    // coloring updates with the service's new path signs
    const nowUpward = flipped.edges.find((e) => e.edge.id === "inf:c->t:inverse")!;
    expect(nowUpward.pressure).toBe("downward"); // still the refuting chain
    expect(flipped.banner!.upwardMass).toBeCloseTo(0.4, 9);
    expect(flipped.banner!.downwardMass).toBeCloseTo(0.09, 9);

    // the persisted map is untouched by previews: refetch and compare
    const refetch = await new ApiClient("", service.fetch).getMap("diamond01");
    expect(refetch.revision).toBe(0);
    const persistedWeight = refetch.map.edges.find(
      (e) => e.id === "inf:c->t:inverse",
    )!.weight;
    expect(persistedWeight).toBe(0.9);
    expect(JSON.stringify(refetch.map)).toBe(JSON.stringify(diamond.map));
    expect(service.requestsTo("PATCH", "/maps/diamond01")).toHaveLength(0);

    console.log("[PASS] UI contract: diamond render, slider whatif flip, preview isolation");
  });
});

// App entry point: pick a map, render it, and run the edit loop.

import { ApiClient } from "./api.js";
import { MapController } from "./controller.js";
import { computeLayout } from "./layout.js";
import { renderBanner, renderExplanation, renderMap } from "./render.js";
import type { EdgeView, NodeView } from "./viewmodel.js";

const api = new ApiClient("..");  // the bundle is served under /ui

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

async function showMapList(): Promise<void> {
  const listing = await api.listMaps();
  const container = el("map-list");
  container.textContent = "";
  if (!listing.maps.length) {
    container.textContent =
      "No maps yet. Build one with the CLI or POST /maps/build, then reload.";
    return;
  }
  const ul = document.createElement("ul");
  for (const entry of listing.maps) {
    const li = document.createElement("li");
    const a = document.createElement("a");
    a.href = `?map=${encodeURIComponent(entry.map_id)}`;
    a.textContent = entry.map_id + (entry.saved ? " (saved)" : "");
    li.appendChild(a);
    ul.appendChild(li);
  }
  container.appendChild(ul);
}

function describeEdge(view: EdgeView): string {
  const flavor = view.edge.kind === "influence" ? view.edge.polarity : view.edge.effect;
  return `${view.sourceLabel} → ${view.targetLabel} (${flavor})`;
}

async function runMap(mapId: string): Promise<void> {
  el("map-section").hidden = false;
  const controller = new MapController(api, mapId);
  const inspector = el("inspector");
  const status = el("status");

  const redraw = () => {
    const viewModel = controller.viewModel();
    if (!viewModel) return;
    const doc = controller.state.workingDoc!;
    const layout = computeLayout(doc);
    renderMap(el("canvas"), viewModel, layout, {
      onSelectNode: showNodeInspector,
      onSelectEdge: showEdgeInspector,
    });
    renderBanner(el("banners"), viewModel);
    renderExplanation(el("explanation"), viewModel);
    el("revision").textContent =
      `revision ${controller.state.revision}` +
      (controller.state.previewing ? " (previewing)" : "");
    status.textContent = controller.state.message ?? "";
    el<HTMLButtonElement>("commit").disabled = !controller.state.previewing;
    el<HTMLButtonElement>("discard").disabled = !controller.state.previewing;
  };

  function showEdgeInspector(view: EdgeView): void {
    inspector.textContent = "";
    const heading = document.createElement("h3");
    heading.textContent = describeEdge(view);
    inspector.appendChild(heading);

    const weightRow = document.createElement("label");
    weightRow.textContent = `weight `;
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "0.01";
    slider.max = "1.0";
    slider.step = "0.01";
    slider.value = String(view.edge.weight);
    slider.id = "weight-slider";
    const value = document.createElement("span");
    value.textContent = view.edge.weight.toFixed(2);
    slider.addEventListener("change", async () => {
      value.textContent = Number(slider.value).toFixed(2);
      await controller.previewWeight(view.edge.id, Number(slider.value));
    });
    weightRow.appendChild(slider);
    weightRow.appendChild(value);
    inspector.appendChild(weightRow);

    for (const item of view.edge.evidence) {
      const quote = document.createElement("blockquote");
      quote.textContent = `${item.passage} [${item.doc_id}]`;
      inspector.appendChild(quote);
    }

    const remove = document.createElement("button");
    remove.textContent = "Remove edge (preview)";
    remove.addEventListener("click", async () => {
      await controller.preview([{ op: "remove_edge", edge: view.edge.id }]);
      inspector.textContent = "";
    });
    inspector.appendChild(remove);
  }

  function showNodeInspector(view: NodeView): void {
    inspector.textContent = "";
    const heading = document.createElement("h3");
    heading.textContent = `${view.node.label} (${view.node.kind})`;
    inspector.appendChild(heading);
    if (view.node.type) {
      const type = document.createElement("p");
      type.className = "muted";
      type.textContent = `type: ${view.node.type}`;
      inspector.appendChild(type);
    }

    const clampRow = document.createElement("div");
    const values = view.node.kind === "state"
      ? ["active"] : ["increasing", "decreasing", "steady"];
    for (const value of values) {
      const button = document.createElement("button");
      button.textContent = view.assumedValue === value ? `✓ ${value}` : `clamp ${value}`;
      button.addEventListener("click", async () => {
        await controller.preview([{ op: "clamp", node: view.node.id, value }]);
      });
      clampRow.appendChild(button);
    }
    if (view.isAssumed) {
      const unclamp = document.createElement("button");
      unclamp.textContent = "unclamp";
      unclamp.addEventListener("click", async () => {
        await controller.preview([{ op: "unclamp", node: view.node.id }]);
      });
      clampRow.appendChild(unclamp);
    }
    inspector.appendChild(clampRow);

    const remove = document.createElement("button");
    remove.textContent = "Delete node (preview)";
    remove.addEventListener("click", async () => {
      const incident = controller.incidentEdgeCount(view.node.id);
      if (incident > 0) {
        const confirmed = window.confirm(
          `'${view.node.label}' has ${incident} incident edge(s); ` +
          "deleting it removes them too. Preview the deletion?",
        );
        if (!confirmed) return;
      }
      await controller.preview([{ op: "remove_node", node: view.node.id }]);
      inspector.textContent = "";
    });
    inspector.appendChild(remove);
  }

  el("commit").addEventListener("click", async () => {
    await controller.commit();
  });
  el("discard").addEventListener("click", async () => {
    inspector.textContent = "";
    await controller.discard();
  });
  el("add-edge-form").addEventListener("submit", async (event) => {
    event.preventDefault();
    const source = el<HTMLInputElement>("edge-source").value.trim();
    const target = el<HTMLInputElement>("edge-target").value.trim();
    const polarity = el<HTMLSelectElement>("edge-polarity").value;
    if (!source || !target) return;
    await controller.preview([{
      op: "add_edge",
      spec: { source, target, kind: "influence", polarity: polarity as "direct" | "inverse" },
    }]);
  });

  controller.onChange(redraw);
  await controller.load();
}

async function boot(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const mapId = params.get("map");
  try {
    if (mapId) {
      await runMap(mapId);
    } else {
      await showMapList();
    }
  } catch (error) {
    el("status").textContent = String(error);
  }
}

void boot();

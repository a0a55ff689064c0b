// SVG rendering of the causal map. Pure DOM construction from a ViewModel
// plus layout positions; interaction callbacks are injected.

import type { LayoutNode } from "./layout.js";
import type { EdgeView, NodeView, ViewModel } from "./viewmodel.js";
import { DOWNWARD_COLOR, UPWARD_COLOR } from "./viewmodel.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface RenderCallbacks {
  onSelectNode(view: NodeView): void;
  onSelectEdge(view: EdgeView): void;
}

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const element = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    element.setAttribute(key, String(value));
  }
  return element;
}

function shorten(
  x1: number, y1: number, x2: number, y2: number, by: number,
): [number, number, number, number] {
  const dx = x2 - x1;
  const dy = y2 - y1;
  const d = Math.max(Math.hypot(dx, dy), 1);
  const trim = Math.min(by, d / 3);
  return [
    x1 + (dx / d) * trim,
    y1 + (dy / d) * trim,
    x2 - (dx / d) * trim,
    y2 - (dy / d) * trim,
  ];
}

export function renderMap(
  container: HTMLElement,
  viewModel: ViewModel,
  layout: Map<string, LayoutNode>,
  callbacks: RenderCallbacks,
  size = { width: 900, height: 600 },
): void {
  container.textContent = "";
  if (viewModel.emptyNotice) {
    const notice = document.createElement("p");
    notice.className = "empty-notice";
    notice.textContent = viewModel.emptyNotice;
    container.appendChild(notice);
    return;
  }

  const svg = svgElement("svg", {
    viewBox: `0 0 ${size.width} ${size.height}`,
    width: "100%",
    height: "100%",
  });
  svg.classList.add("map-canvas");

  const defs = svgElement("defs", {});
  for (const [name, color] of [
    ["arrow-up", UPWARD_COLOR],
    ["arrow-down", DOWNWARD_COLOR],
    ["arrow-neutral", "#9ca3af"],
  ] as const) {
    const marker = svgElement("marker", {
      id: name, viewBox: "0 0 10 10", refX: 9, refY: 5,
      markerWidth: 7, markerHeight: 7, orient: "auto-start-reverse",
    });
    marker.appendChild(svgElement("path", { d: "M 0 0 L 10 5 L 0 10 z", fill: color }));
    defs.appendChild(marker);
  }
  svg.appendChild(defs);

  const edgeGroup = svgElement("g", {});
  for (const view of viewModel.edges) {
    const a = layout.get(view.edge.source);
    const b = layout.get(view.edge.target);
    if (!a || !b) continue;
    const [x1, y1, x2, y2] = shorten(a.x, a.y, b.x, b.y, 30);
    const marker = view.pressure === "upward" || view.pressure === "both"
      ? "arrow-up" : view.pressure === "downward" ? "arrow-down" : "arrow-neutral";
    const base = svgElement("line", {
      x1, y1, x2, y2,
      stroke: view.color,
      "stroke-width": 1.5 + view.edge.weight * 2.5,
      "marker-end": `url(#${marker})`,
    });
    base.classList.add("edge");
    base.dataset.edgeId = view.edge.id;
    base.dataset.pressure = view.pressure;
    if (view.dashed) {
      base.setAttribute("stroke-dasharray", "8 8");
      const overlay = svgElement("line", {
        x1, y1, x2, y2,
        stroke: DOWNWARD_COLOR,
        "stroke-width": 1.5 + view.edge.weight * 2.5,
        "stroke-dasharray": "8 8",
        "stroke-dashoffset": 8,
      });
      overlay.classList.add("edge-overlay");
      edgeGroup.appendChild(overlay);
    }
    if (view.edge.kind === "trigger") {
      base.setAttribute("stroke-dasharray", view.dashed ? "8 8" : "2 4");
    }
    base.addEventListener("click", () => callbacks.onSelectEdge(view));
    edgeGroup.appendChild(base);

    const label = svgElement("text", {
      x: (x1 + x2) / 2,
      y: (y1 + y2) / 2 - 6,
      "text-anchor": "middle",
    });
    label.classList.add("edge-weight");
    label.textContent = view.edge.weight.toFixed(2);
    label.addEventListener("click", () => callbacks.onSelectEdge(view));
    edgeGroup.appendChild(label);
  }
  svg.appendChild(edgeGroup);

  const nodeGroup = svgElement("g", {});
  for (const view of viewModel.nodes) {
    const position = layout.get(view.node.id);
    if (!position) continue;
    const group = svgElement("g", {});
    group.classList.add("node");
    group.dataset.nodeId = view.node.id;
    group.dataset.direction = view.direction;

    let shape: SVGElement;
    if (view.node.kind === "quantity") {
      shape = svgElement("circle", { cx: position.x, cy: position.y, r: 26 });
    } else {
      shape = svgElement("rect", {
        x: position.x - 30, y: position.y - 20, width: 60, height: 40, rx: 9,
      });
    }
    shape.setAttribute("fill", view.activeState ? "#e5e7eb" : "#ffffff");
    shape.setAttribute("stroke", view.mutexViolated ? "#b91c1c" : view.color);
    shape.setAttribute("stroke-width", view.mutexViolated ? "4" : view.isTarget ? "3.5" : "2");
    if (view.mutexViolated) {
      shape.setAttribute("stroke-dasharray", "4 3");
    }
    group.appendChild(shape);

    const text = svgElement("text", {
      x: position.x, y: position.y + 4, "text-anchor": "middle",
    });
    text.classList.add("node-label");
    text.textContent = view.node.label.length > 18
      ? view.node.label.slice(0, 17) + "…"
      : view.node.label;
    group.appendChild(text);

    if (view.direction !== "none") {
      const glyph = view.direction === "increasing" ? "↑"
        : view.direction === "decreasing" ? "↓" : "↕";
      const badge = svgElement("text", {
        x: position.x, y: position.y - 30, "text-anchor": "middle", fill: view.color,
      });
      badge.classList.add("direction-badge");
      badge.textContent = glyph;
      group.appendChild(badge);
    }
    if (view.isAssumed) {
      const pin = svgElement("text", {
        x: position.x + 26, y: position.y - 22, "text-anchor": "middle",
      });
      pin.classList.add("pin-badge");
      pin.textContent = "⚓";
      group.appendChild(pin);
    }
    group.addEventListener("click", () => callbacks.onSelectNode(view));
    nodeGroup.appendChild(group);
  }
  svg.appendChild(nodeGroup);
  container.appendChild(svg);
}

export function renderBanner(container: HTMLElement, viewModel: ViewModel): void {
  container.textContent = "";
  if (viewModel.banner) {
    const verdict = document.createElement("div");
    verdict.className = `verdict-banner verdict-${viewModel.banner.direction}`;
    verdict.dataset.direction = viewModel.banner.direction;
    const masses = `U ${viewModel.banner.upwardMass.toFixed(3)} / ` +
      `D ${viewModel.banner.downwardMass.toFixed(3)}`;
    verdict.textContent = `${viewModel.banner.text} (${masses})`;
    container.appendChild(verdict);
  }
  for (const notice of viewModel.contradictionNotices) {
    const banner = document.createElement("div");
    banner.className = "contradiction-banner";
    banner.textContent = notice;
    container.appendChild(banner);
  }
}

export function renderExplanation(container: HTMLElement, viewModel: ViewModel): void {
  container.textContent = "";
  const section = (title: string, cls: string, paths: ViewModel["upwardPaths"]) => {
    const heading = document.createElement("h3");
    heading.textContent = title;
    heading.className = cls;
    container.appendChild(heading);
    if (!paths.length) {
      const none = document.createElement("p");
      none.className = "muted";
      none.textContent = "(none)";
      container.appendChild(none);
      return;
    }
    const list = document.createElement("ol");
    for (const path of paths) {
      const item = document.createElement("li");
      const docs = path.docIds.length ? `  [${path.docIds.join(", ")}]` : "";
      item.textContent = `(${path.strength.toFixed(4)}) ${path.labelChain}${docs}`;
      list.appendChild(item);
    }
    container.appendChild(list);
  };
  section("Upward pressures", "upward-heading", viewModel.upwardPaths);
  section("Downward pressures", "downward-heading", viewModel.downwardPaths);
  if (viewModel.notes.length) {
    const heading = document.createElement("h3");
    heading.textContent = "Notes";
    container.appendChild(heading);
    for (const note of viewModel.notes) {
      const p = document.createElement("p");
      p.className = "muted";
      p.textContent = note;
      container.appendChild(p);
    }
  }
}

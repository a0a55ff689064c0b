// Deterministic force-directed layout. Sources are pinned to the left
// column, the target to the right, so causal flow reads left to right.
// Positions are client-side display state only and are never persisted.

import type { MapDocument } from "./types.js";

export interface LayoutNode {
  id: string;
  x: number;
  y: number;
  vx: number;
  vy: number;
  pinned: boolean;
}

export interface LayoutOptions {
  width: number;
  height: number;
  iterations: number;
  springLength: number;
  springStrength: number;
  repulsion: number;
  damping: number;
}

export const DEFAULT_LAYOUT: LayoutOptions = {
  width: 900,
  height: 600,
  iterations: 300,
  springLength: 140,
  springStrength: 0.02,
  repulsion: 28000,
  damping: 0.85,
};

// Deterministic pseudo-random in [0,1) from a node id, so layouts are
// reproducible across reloads without seeding state.
function hash01(text: string, salt: number): number {
  let h = 2166136261 ^ salt;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 16777619);
  }
  return ((h >>> 0) % 100_000) / 100_000;
}

export function computeLayout(
  doc: MapDocument,
  options: Partial<LayoutOptions> = {},
): Map<string, LayoutNode> {
  const opts = { ...DEFAULT_LAYOUT, ...options };
  const { width, height } = opts;
  const margin = 70;

  const target = doc.scenario?.target ?? null;
  const sources = new Set((doc.scenario?.assumptions ?? []).map((a) => a.node));

  const nodes = new Map<string, LayoutNode>();
  const sourceList = doc.nodes.filter((n) => sources.has(n.id));
  sourceList.forEach((node, index) => {
    nodes.set(node.id, {
      id: node.id,
      x: margin,
      y: ((index + 1) * height) / (sourceList.length + 1),
      vx: 0,
      vy: 0,
      pinned: true,
    });
  });
  for (const node of doc.nodes) {
    if (nodes.has(node.id)) continue;
    if (node.id === target) {
      nodes.set(node.id, {
        id: node.id, x: width - margin, y: height / 2, vx: 0, vy: 0, pinned: true,
      });
    } else {
      nodes.set(node.id, {
        id: node.id,
        x: margin + (width - 2 * margin) * (0.2 + 0.6 * hash01(node.id, 1)),
        y: margin + (height - 2 * margin) * hash01(node.id, 2),
        vx: 0,
        vy: 0,
        pinned: false,
      });
    }
  }

  const links = doc.edges
    .filter((e) => nodes.has(e.source) && nodes.has(e.target))
    .map((e) => ({ source: e.source, target: e.target }));

  const list = [...nodes.values()];
  for (let step = 0; step < opts.iterations; step++) {
    // pairwise repulsion
    for (let i = 0; i < list.length; i++) {
      for (let j = i + 1; j < list.length; j++) {
        const a = list[i];
        const b = list[j];
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        let d2 = dx * dx + dy * dy;
        if (d2 < 1) {
          // split coincident nodes deterministically
          dx = 0.5 + hash01(a.id + b.id, 3);
          dy = 0.5;
          d2 = dx * dx + dy * dy;
        }
        const force = opts.repulsion / d2;
        const d = Math.sqrt(d2);
        const fx = (dx / d) * force;
        const fy = (dy / d) * force;
        if (!a.pinned) { a.vx += fx; a.vy += fy; }
        if (!b.pinned) { b.vx -= fx; b.vy -= fy; }
      }
    }
    // springs along edges
    for (const link of links) {
      const a = nodes.get(link.source)!;
      const b = nodes.get(link.target)!;
      const dx = b.x - a.x;
      const dy = b.y - a.y;
      const d = Math.max(Math.sqrt(dx * dx + dy * dy), 1);
      const stretch = (d - opts.springLength) * opts.springStrength;
      const fx = (dx / d) * stretch;
      const fy = (dy / d) * stretch;
      if (!a.pinned) { a.vx += fx; a.vy += fy; }
      if (!b.pinned) { b.vx -= fx; b.vy -= fy; }
    }
    // integrate with damping, clamp to canvas
    for (const node of list) {
      if (node.pinned) continue;
      node.vx *= opts.damping;
      node.vy *= opts.damping;
      node.x += Math.max(-30, Math.min(30, node.vx));
      node.y += Math.max(-30, Math.min(30, node.vy));
      node.x = Math.max(margin, Math.min(width - margin, node.x));
      node.y = Math.max(margin, Math.min(height - margin, node.y));
    }
  }
  return nodes;
}

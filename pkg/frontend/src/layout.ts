/**
 * Automatic layout for server view models.
 *
 * Triples are drawn as three columns — source | correspondence | target —
 * with correspondence entries boxed between the graphs they join. Match
 * views carry two sub-graphs ("rule:*" and "host:*" element ids); those are
 * stacked as two bands with the match links crossing between them.
 */

import { DisplayOptions, Emphasis, ViewModel } from "./protocol.js";

export interface Point {
  x: number;
  y: number;
}

export type BoxRole = "source" | "target" | "corr";

export interface Box {
  id: string;
  x: number;
  y: number;
  w: number;
  h: number;
  label: string;
  role: BoxRole;
  emphasis: Emphasis;
  band: number;
}

export type ConnectorKind = "edge" | "corrLink" | "matchLink";

export interface Connector {
  id: string;
  kind: ConnectorKind;
  from: Point;
  to: Point;
  label: string;
  emphasis: Emphasis;
  directed: boolean;
}

export interface DiagramLayout {
  boxes: Box[];
  connectors: Connector[];
  /** y coordinates of band separators (one when a host band exists). */
  separators: number[];
  width: number;
  height: number;
}

const NODE_W = 180;
const NODE_H = 36;
const CORR_W = 160;
const CORR_H = 30;
const COL_PITCH = 270;
const ROW_PITCH = 66;
const BAND_GAP = 90;
const MARGIN = 40;

/**
 * Apply the visibility toggles client-side: hidden domains lose their nodes
 * and edges, and anything whose endpoints went away disappears with them.
 */
export function filterViewModel(vm: ViewModel, options: DisplayOptions): ViewModel {
  const nodes = vm.nodes.filter(
    (n) => (n.domain === "SOURCE" ? options.showSource : options.showTarget),
  );
  const visible = new Set(nodes.map((n) => n.id));
  const edges = vm.edges.filter((e) => visible.has(e.source) && visible.has(e.target));
  const corrs = options.showCorrespondence
    ? vm.corrs.filter((c) => visible.has(c.source) && visible.has(c.target))
    : [];
  const present = new Set<string>([
    ...visible,
    ...edges.map((e) => e.id),
    ...corrs.map((c) => c.id),
  ]);
  const matchLinks = vm.matchLinks.filter(
    (l) => present.has(l.ruleElement) && present.has(l.hostElement),
  );
  return { nodes, edges, corrs, matchLinks };
}

function bandOf(id: string): number {
  return id.startsWith("host:") ? 1 : 0;
}

function columnOf(role: BoxRole): number {
  return role === "source" ? 0 : role === "corr" ? 1 : 2;
}

function columnCenterX(col: number): number {
  return MARGIN + col * COL_PITCH + NODE_W / 2;
}

function center(box: Box): Point {
  return { x: box.x + box.w / 2, y: box.y + box.h / 2 };
}

/** Point where the segment from the box centre toward `toward` leaves the box. */
function clipToBox(box: Box, toward: Point): Point {
  const c = center(box);
  const dx = toward.x - c.x;
  const dy = toward.y - c.y;
  if (dx === 0 && dy === 0) return c;
  const scaleX = dx !== 0 ? box.w / 2 / Math.abs(dx) : Infinity;
  const scaleY = dy !== 0 ? box.h / 2 / Math.abs(dy) : Infinity;
  const t = Math.min(scaleX, scaleY);
  return { x: c.x + dx * t, y: c.y + dy * t };
}

function midpoint(a: Point, b: Point): Point {
  return { x: (a.x + b.x) / 2, y: (a.y + b.y) / 2 };
}

export function layoutViewModel(vm: ViewModel): DiagramLayout {
  const bands = [...new Set([...vm.nodes, ...vm.corrs].map((el) => bandOf(el.id)))].sort();
  const boxes: Box[] = [];
  const byId = new Map<string, Box>();

  // nodes first: stacked per (band, column) in server order
  const stackHeights = new Map<string, number>();
  const bandRows = new Map<number, number>();
  for (const node of vm.nodes) {
    const band = bandOf(node.id);
    const role: BoxRole = node.domain === "SOURCE" ? "source" : "target";
    const key = `${band}:${columnOf(role)}`;
    const row = stackHeights.get(key) ?? 0;
    stackHeights.set(key, row + 1);
    bandRows.set(band, Math.max(bandRows.get(band) ?? 0, row + 1));
    const box: Box = {
      id: node.id,
      x: columnCenterX(columnOf(role)) - NODE_W / 2,
      y: row * ROW_PITCH, // band offset applied below
      w: NODE_W,
      h: NODE_H,
      label: node.label,
      role,
      emphasis: node.emphasis,
      band,
    };
    boxes.push(box);
    byId.set(node.id, box);
  }

  // correspondence boxes go to the middle column, near their endpoints
  const corrRows = new Map<number, number[]>();
  for (const corr of vm.corrs) {
    const band = bandOf(corr.id);
    const src = byId.get(corr.source);
    const tgt = byId.get(corr.target);
    let y =
      src && tgt ? (src.y + tgt.y) / 2 + (NODE_H - CORR_H) / 2 : (corrRows.get(band)?.length ?? 0) * ROW_PITCH;
    const used = corrRows.get(band) ?? [];
    while (used.some((other) => Math.abs(other - y) < CORR_H + 10)) y += CORR_H + 12;
    used.push(y);
    corrRows.set(band, used);
    bandRows.set(band, Math.max(bandRows.get(band) ?? 0, Math.ceil((y + CORR_H) / ROW_PITCH)));
    const box: Box = {
      id: corr.id,
      x: columnCenterX(1) - CORR_W / 2,
      y,
      w: CORR_W,
      h: CORR_H,
      label: corr.label,
      role: "corr",
      emphasis: corr.emphasis,
      band,
    };
    boxes.push(box);
    byId.set(corr.id, box);
  }

  // shift each band below the previous one
  const bandTops = new Map<number, number>();
  let cursor = MARGIN;
  const separators: number[] = [];
  for (const band of bands) {
    if (cursor > MARGIN) {
      separators.push(cursor - BAND_GAP / 2);
    }
    bandTops.set(band, cursor);
    cursor += (bandRows.get(band) ?? 1) * ROW_PITCH + BAND_GAP;
  }
  for (const box of boxes) {
    box.y += bandTops.get(box.band) ?? MARGIN;
  }

  const connectors: Connector[] = [];
  const anchors = new Map<string, Point>();
  for (const box of boxes) anchors.set(box.id, center(box));

  for (const edge of vm.edges) {
    const from = byId.get(edge.source);
    const to = byId.get(edge.target);
    if (!from || !to) continue;
    const start = clipToBox(from, center(to));
    const end = clipToBox(to, center(from));
    connectors.push({
      id: edge.id,
      kind: "edge",
      from: start,
      to: end,
      label: edge.label,
      emphasis: edge.emphasis,
      directed: true,
    });
    anchors.set(edge.id, midpoint(start, end));
  }

  for (const corr of vm.corrs) {
    const box = byId.get(corr.id);
    if (!box) continue;
    for (const endId of [corr.source, corr.target]) {
      const end = byId.get(endId);
      if (!end) continue;
      connectors.push({
        id: `${corr.id}~${endId}`,
        kind: "corrLink",
        from: clipToBox(box, center(end)),
        to: clipToBox(end, center(box)),
        label: "",
        emphasis: corr.emphasis,
        directed: false,
      });
    }
  }

  for (const link of vm.matchLinks) {
    const from = anchors.get(link.ruleElement);
    const to = anchors.get(link.hostElement);
    if (!from || !to) continue;
    connectors.push({
      id: `${link.ruleElement}~${link.hostElement}`,
      kind: "matchLink",
      from,
      to,
      label: "",
      emphasis: "PLAIN",
      directed: false,
    });
  }

  const width = MARGIN * 2 + 2 * COL_PITCH + NODE_W;
  const height = Math.max(cursor - BAND_GAP + MARGIN, MARGIN * 2 + ROW_PITCH);
  return { boxes, connectors, separators, width, height };
}

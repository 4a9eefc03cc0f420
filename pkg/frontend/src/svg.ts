/**
 * SVG rendering of a laid-out diagram. Colors follow the server's own
 * renderers: peach source, rose target, white correspondence boxes, green
 * outlines for created elements, dashed purple match links.
 */

import { Connector, DiagramLayout } from "./layout.js";
import { Emphasis } from "./protocol.js";

export const SOURCE_FILL = "#FFDAB9";
export const TARGET_FILL = "#FFE4E1";
export const CORR_FILL = "#FFFFFF";
export const CREATED_OUTLINE = "#2E7D32";
export const PLAIN_OUTLINE = "#000000";
export const MATCH_LINK_COLOR = "#800080";

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&apos;");
}

function outlineFor(emphasis: Emphasis): string {
  return emphasis === "CREATED" ? CREATED_OUTLINE : PLAIN_OUTLINE;
}

function connectorAttrs(connector: Connector): string {
  switch (connector.kind) {
    case "edge":
      return `stroke="${outlineFor(connector.emphasis)}" stroke-width="1.5" marker-end="url(#arrow)"`;
    case "corrLink":
      return `stroke="${PLAIN_OUTLINE}" stroke-width="1.2" stroke-dasharray="6 4"`;
    case "matchLink":
      return `stroke="${MATCH_LINK_COLOR}" stroke-width="1.5" stroke-dasharray="4 4"`;
  }
}

const FILLS = { source: SOURCE_FILL, target: TARGET_FILL, corr: CORR_FILL } as const;

export function renderSvg(layout: DiagramLayout): string {
  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${layout.width} ${layout.height}" ` +
      `width="${layout.width}" height="${layout.height}" font-family="system-ui, sans-serif">`,
  );
  parts.push(
    `<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7" ` +
      `markerHeight="7" orient="auto-start-reverse">` +
      `<path d="M 0 0 L 10 5 L 0 10 z" fill="context-stroke"/></marker></defs>`,
  );

  for (const y of layout.separators) {
    parts.push(
      `<line x1="0" y1="${y}" x2="${layout.width}" y2="${y}" stroke="#999999" ` +
        `stroke-width="1" stroke-dasharray="2 6"/>`,
    );
  }

  // connectors under the boxes so lines never cover labels
  for (const connector of layout.connectors) {
    const { from, to } = connector;
    parts.push(
      `<line x1="${fmt(from.x)}" y1="${fmt(from.y)}" x2="${fmt(to.x)}" y2="${fmt(to.y)}" ` +
        connectorAttrs(connector) +
        "/>",
    );
    if (connector.label) {
      const mx = (from.x + to.x) / 2;
      const my = (from.y + to.y) / 2 - 5;
      parts.push(
        `<text x="${fmt(mx)}" y="${fmt(my)}" font-size="11" text-anchor="middle" ` +
          `fill="${outlineFor(connector.emphasis)}">${escapeXml(connector.label)}</text>`,
      );
    }
  }

  for (const box of layout.boxes) {
    const stroke = outlineFor(box.emphasis);
    const strokeWidth = box.emphasis === "CREATED" ? 2.5 : 1.2;
    parts.push(
      `<g><rect x="${fmt(box.x)}" y="${fmt(box.y)}" width="${box.w}" height="${box.h}" rx="6" ` +
        `fill="${FILLS[box.role]}" stroke="${stroke}" stroke-width="${strokeWidth}"/>` +
        `<text x="${fmt(box.x + box.w / 2)}" y="${fmt(box.y + box.h / 2 + 4)}" font-size="12" ` +
        `text-anchor="middle">${escapeXml(truncate(box.label, 28))}</text>` +
        `<title>${escapeXml(box.label)}</title></g>`,
    );
  }

  parts.push("</svg>");
  return parts.join("\n");
}

function truncate(text: string, max: number): string {
  return text.length <= max ? text : text.slice(0, max - 1) + "…";
}

function fmt(value: number): string {
  return Number.isInteger(value) ? String(value) : value.toFixed(1);
}

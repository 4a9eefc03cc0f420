import { describe, expect, test } from "vitest";
import { filterViewModel, layoutViewModel } from "../src/layout.js";
import { DEFAULT_OPTIONS, ViewModel } from "../src/protocol.js";

/** Shape of a one-rule view: source pair, corr, target pair. */
function ruleView(): ViewModel {
  return {
    nodes: [
      { id: "company", label: "company: Company", domain: "SOURCE", emphasis: "CONTEXT" },
      { id: "admin", label: "admin: Admin", domain: "SOURCE", emphasis: "CREATED" },
      { id: "it", label: "it: IT", domain: "TARGET", emphasis: "CONTEXT" },
      { id: "router", label: "router: Router", domain: "TARGET", emphasis: "CREATED" },
    ],
    edges: [
      { id: "adminsEdge", source: "company", target: "admin", label: "admins", domain: "SOURCE", emphasis: "CREATED" },
      { id: "routersEdge", source: "it", target: "router", label: "routers", domain: "TARGET", emphasis: "CREATED" },
    ],
    corrs: [
      { id: "companyIt", source: "company", target: "it", label: "companyIt: CompanyToITCorr", emphasis: "CONTEXT" },
      { id: "adminRouter", source: "admin", target: "router", label: "adminRouter: AdminToRouterCorr", emphasis: "CREATED" },
    ],
    matchLinks: [],
  };
}

/** Match views prefix the pattern and the host halves. */
function matchView(): ViewModel {
  return {
    nodes: [
      { id: "rule:admin", label: "admin: Admin", domain: "SOURCE", emphasis: "CREATED" },
      { id: "rule:it", label: "it: IT", domain: "TARGET", emphasis: "CONTEXT" },
      { id: "host:a1", label: "a1: Admin", domain: "SOURCE", emphasis: "PLAIN" },
      { id: "host:e2", label: "e2: IT", domain: "TARGET", emphasis: "PLAIN" },
    ],
    edges: [
      { id: "host:ed2", source: "host:a1", target: "host:e2", label: "x", domain: "SOURCE", emphasis: "PLAIN" },
    ],
    corrs: [],
    matchLinks: [
      { ruleElement: "rule:admin", hostElement: "host:a1" },
      { ruleElement: "rule:it", hostElement: "host:e2" },
    ],
  };
}

describe("column discipline", () => {
  test("source sits left of correspondence, correspondence left of target", () => {
    const layout = layoutViewModel(ruleView());
    const byId = new Map(layout.boxes.map((b) => [b.id, b]));
    const sourceX = [byId.get("company")!.x, byId.get("admin")!.x];
    const corrX = [byId.get("companyIt")!.x, byId.get("adminRouter")!.x];
    const targetX = [byId.get("it")!.x, byId.get("router")!.x];
    expect(Math.max(...sourceX)).toBeLessThan(Math.min(...corrX));
    expect(Math.max(...corrX)).toBeLessThan(Math.min(...targetX));
  });

  test("boxes in a column never overlap vertically", () => {
    const layout = layoutViewModel(ruleView());
    const columns = new Map<number, Array<{ y: number; h: number }>>();
    for (const box of layout.boxes) {
      const list = columns.get(box.x) ?? [];
      list.push({ y: box.y, h: box.h });
      columns.set(box.x, list);
    }
    for (const list of columns.values()) {
      const sorted = [...list].sort((a, b) => a.y - b.y);
      for (let i = 1; i < sorted.length; i++) {
        expect(sorted[i]!.y).toBeGreaterThanOrEqual(sorted[i - 1]!.y + sorted[i - 1]!.h);
      }
    }
  });

  test("every box lies inside the reported canvas", () => {
    const layout = layoutViewModel(ruleView());
    for (const box of layout.boxes) {
      expect(box.x).toBeGreaterThanOrEqual(0);
      expect(box.y).toBeGreaterThanOrEqual(0);
      expect(box.x + box.w).toBeLessThanOrEqual(layout.width);
      expect(box.y + box.h).toBeLessThanOrEqual(layout.height);
    }
  });
});

describe("connectors", () => {
  test("each edge becomes one directed connector, each corr two dashed ones", () => {
    const layout = layoutViewModel(ruleView());
    expect(layout.connectors.filter((c) => c.kind === "edge")).toHaveLength(2);
    expect(layout.connectors.filter((c) => c.kind === "corrLink")).toHaveLength(4);
    for (const connector of layout.connectors) {
      expect(connector.kind === "edge").toBe(connector.directed);
    }
  });

  test("edge endpoints touch the node borders, not the centres", () => {
    const layout = layoutViewModel(ruleView());
    const byId = new Map(layout.boxes.map((b) => [b.id, b]));
    const edge = layout.connectors.find((c) => c.id === "adminsEdge")!;
    const from = byId.get("company")!;
    const inside = (box: typeof from, p: { x: number; y: number }) =>
      p.x > box.x && p.x < box.x + box.w && p.y > box.y && p.y < box.y + box.h;
    expect(inside(from, edge.from)).toBe(false);
  });
});

describe("match views", () => {
  test("the host band lies strictly below the rule band, with a separator", () => {
    const layout = layoutViewModel(matchView());
    const ruleBottom = Math.max(...layout.boxes.filter((b) => b.band === 0).map((b) => b.y + b.h));
    const hostTop = Math.min(...layout.boxes.filter((b) => b.band === 1).map((b) => b.y));
    expect(hostTop).toBeGreaterThan(ruleBottom);
    expect(layout.separators).toHaveLength(1);
    expect(layout.separators[0]!).toBeGreaterThan(ruleBottom);
    expect(layout.separators[0]!).toBeLessThan(hostTop);
  });

  test("match links connect both bands, including edge-anchored ones", () => {
    const vm = matchView();
    vm.matchLinks.push({ ruleElement: "rule:admin", hostElement: "host:ed2" });
    const layout = layoutViewModel(vm);
    const links = layout.connectors.filter((c) => c.kind === "matchLink");
    expect(links).toHaveLength(3);
    const edgeConnector = layout.connectors.find((c) => c.id === "host:ed2")!;
    const anchored = links.find((c) => c.id === "rule:admin~host:ed2")!;
    // the edge-anchored link lands on the midpoint of that edge
    expect(anchored.to.x).toBeCloseTo((edgeConnector.from.x + edgeConnector.to.x) / 2, 5);
    expect(anchored.to.y).toBeCloseTo((edgeConnector.from.y + edgeConnector.to.y) / 2, 5);
  });

  test("links to hidden elements vanish with them", () => {
    const filtered = filterViewModel(matchView(), { ...DEFAULT_OPTIONS, showTarget: false });
    expect(filtered.nodes.map((n) => n.id)).toEqual(["rule:admin", "host:a1"]);
    expect(filtered.edges).toHaveLength(0); // host edge lost its target endpoint
    expect(filtered.matchLinks).toEqual([{ ruleElement: "rule:admin", hostElement: "host:a1" }]);
  });
});

describe("visibility filtering", () => {
  test("hiding correspondence keeps the graphs intact", () => {
    const filtered = filterViewModel(ruleView(), { ...DEFAULT_OPTIONS, showCorrespondence: false });
    expect(filtered.corrs).toEqual([]);
    expect(filtered.nodes).toHaveLength(4);
    expect(filtered.edges).toHaveLength(2);
  });

  test("hiding the source drops its nodes, edges and the corrs that dangle", () => {
    const filtered = filterViewModel(ruleView(), { ...DEFAULT_OPTIONS, showSource: false });
    expect(filtered.nodes.map((n) => n.id)).toEqual(["it", "router"]);
    expect(filtered.edges.map((e) => e.id)).toEqual(["routersEdge"]);
    expect(filtered.corrs).toEqual([]);
  });
});

describe("stability", () => {
  test("the same view model always lays out identically", () => {
    expect(layoutViewModel(ruleView())).toEqual(layoutViewModel(ruleView()));
    expect(layoutViewModel(matchView())).toEqual(layoutViewModel(matchView()));
  });

  test("an empty view model still yields a drawable canvas", () => {
    const layout = layoutViewModel({ nodes: [], edges: [], corrs: [], matchLinks: [] });
    expect(layout.boxes).toEqual([]);
    expect(layout.width).toBeGreaterThan(0);
    expect(layout.height).toBeGreaterThan(0);
  });
});

import { describe, expect, test } from "vitest";
import { RequestError, WireClient } from "../src/client.js";
import { DataPackage } from "../src/protocol.js";
import { FakeTransport, makePackage, ok, packageEvent } from "./fake.js";

describe("request correlation", () => {
  test("responses resolve by id even out of order", async () => {
    const fake = new FakeTransport();
    const client = new WireClient(fake);
    const first = client.request("overview");
    const second = client.request("protocol");
    const [reqA, reqB] = fake.requests;
    fake.deliver(ok(reqB!, { kind: "FWD", applications: [] }));
    fake.deliver(ok(reqA!, { answer: 1 }));
    expect(await second).toEqual({ kind: "FWD", applications: [] });
    expect(await first).toEqual({ answer: 1 });
  });

  test("ids increase monotonically", () => {
    const fake = new FakeTransport();
    const client = new WireClient(fake);
    void client.request("overview").catch(() => undefined);
    void client.request("overview").catch(() => undefined);
    void client.request("hello").catch(() => undefined);
    expect(fake.requests.map((r) => r.id)).toEqual([1, 2, 3]);
  });

  test("error responses reject with code and message", async () => {
    const fake = new FakeTransport();
    fake.respondOnce((req) => [
      { id: req.id, ok: false, error: { code: "ARGUMENT", message: "unknown rule 'Ghost'" } },
    ]);
    const client = new WireClient(fake);
    const failure: unknown = await client.request("matches", { rule: "Ghost" }).catch((e) => e);
    expect(failure).toBeInstanceOf(RequestError);
    const error = failure as RequestError;
    expect(error.code).toBe("ARGUMENT");
    expect(error.message).toContain("Ghost");
  });

  test("params default to an empty object on the wire", () => {
    const fake = new FakeTransport();
    const client = new WireClient(fake);
    void client.request("overview").catch(() => undefined);
    expect(fake.requests[0]).toEqual({ id: 1, type: "overview", params: {} });
  });
});

describe("events", () => {
  test("dataPackage events reach every handler", () => {
    const fake = new FakeTransport();
    const client = new WireClient(fake);
    const seen: DataPackage[] = [];
    client.onEvent((pkg) => seen.push(pkg));
    client.onEvent((pkg) => seen.push(pkg));
    const pkg = makePackage({ protocolLength: 3 });
    fake.deliver(packageEvent(pkg));
    expect(seen).toHaveLength(2);
    expect(seen[0]?.protocolLength).toBe(3);
  });

  test("events do not disturb pending requests", async () => {
    const fake = new FakeTransport();
    const client = new WireClient(fake);
    const pending = client.request("overview");
    fake.deliver(packageEvent(makePackage()));
    fake.deliver(ok(fake.requests[0]!, makePackage({ protocolLength: 7 })));
    expect(((await pending) as DataPackage).protocolLength).toBe(7);
  });
});

describe("mutation lock", () => {
  test("a second state-changing request is refused while one is pending", async () => {
    const fake = new FakeTransport();
    const client = new WireClient(fake);
    const first = client.request("applyRandom");
    expect(client.mutationInFlight).toBe(true);
    const second = await client.request("resume", { maxSteps: 5 }).catch((e) => e);
    expect(second).toBeInstanceOf(RequestError);
    expect((second as RequestError).code).toBe("BUSY");
    // only the first mutation ever reached the wire
    expect(fake.requests.map((r) => r.type)).toEqual(["applyRandom"]);
    fake.deliver(ok(fake.requests[0]!, makePackage()));
    await first;
    expect(client.mutationInFlight).toBe(false);
  });

  test("read-only requests overlap freely with a pending mutation", async () => {
    const fake = new FakeTransport();
    const client = new WireClient(fake);
    const mutation = client.request("apply", { rule: "R", matchId: "R#0" });
    const read = client.request("overview");
    expect(fake.requests.map((r) => r.type)).toEqual(["apply", "overview"]);
    fake.deliver(ok(fake.requests[1]!, makePackage()));
    await read;
    expect(client.mutationInFlight).toBe(true);
    fake.deliver(ok(fake.requests[0]!, makePackage()));
    await mutation;
  });

  test("lock releases when the mutation fails", async () => {
    const fake = new FakeTransport();
    fake.respondOnce((req) => [{ id: req.id, ok: false, error: { code: "NO_MATCH", message: "nope" } }]);
    const client = new WireClient(fake);
    await expect(client.request("applyRandom")).rejects.toMatchObject({ code: "NO_MATCH" });
    expect(client.mutationInFlight).toBe(false);
  });
});

describe("connection loss", () => {
  test("pending requests reject and later ones fail fast", async () => {
    const fake = new FakeTransport();
    const client = new WireClient(fake);
    const pending = client.request("overview");
    fake.dropConnection("server went away");
    await expect(pending).rejects.toMatchObject({ code: "CONNECTION" });
    await expect(client.request("overview")).rejects.toMatchObject({ code: "CONNECTION" });
  });

  test("close handlers fire once with the reason", () => {
    const fake = new FakeTransport();
    const client = new WireClient(fake);
    const reasons: string[] = [];
    client.onClose((reason) => reasons.push(reason));
    fake.dropConnection("boom");
    fake.dropConnection("boom again");
    expect(reasons).toEqual(["boom"]);
  });
});

describe("garbage tolerance", () => {
  test("unparseable and unmatched lines are logged, not fatal", async () => {
    const fake = new FakeTransport();
    const client = new WireClient(fake);
    fake.deliver("{not json");
    fake.deliver(ok({ id: 999, type: "x", params: {} }, {}));
    fake.deliver({ something: "else" });
    expect(client.protocolErrorLog).toHaveLength(3);
    const pending = client.request("overview");
    fake.deliver(ok(fake.requests[0]!, makePackage()));
    await pending; // the client still works afterwards
  });
});

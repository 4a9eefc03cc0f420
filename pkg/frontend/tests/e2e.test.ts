import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";
import { dirname, resolve } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { WireClient } from "../src/client.js";
import { controlBar, protocolRows, ruleListRows } from "../src/panes.js";
import type { DataPackage, RuleStatus } from "../src/protocol.js";
import { SessionController } from "../src/store.js";
import { TcpLineTransport } from "./tcp.js";

const REPO_ROOT = resolve(dirname(fileURLToPath(import.meta.url)), "..", "..");

const AXIOM = "CompanyToITRule";
const ADMIN = "AdminToRouterRule";
const EMPLOYEE_PC = "EmployeeToPCRule";
const EMPLOYEE_LAPTOP = "EmployeeToLaptopRule";

function startServer(): Promise<{ proc: ChildProcessWithoutNullStreams; port: number }> {
  const proc = spawn(
    "python3",
    [
      "-m",
      "tggkit",
      "serve",
      "--ruleset",
      resolve(REPO_ROOT, "fixtures", "companytoit.ruleset.json"),
      "--mode",
      "fwd",
      "--input",
      resolve(REPO_ROOT, "fixtures", "two_admins_one_employee.triple.json"),
      "--seed",
      "1",
      "--port",
      "0",
    ],
    { cwd: REPO_ROOT, stdio: ["pipe", "pipe", "pipe"] },
  );
  let stderr = "";
  proc.stderr.on("data", (chunk: Buffer) => {
    stderr += chunk.toString("utf8");
  });
  return new Promise((resolvePort, reject) => {
    let banner = "";
    const timer = setTimeout(() => {
      proc.kill();
      reject(new Error(`server never announced its port; stderr so far: ${stderr}`));
    }, 20_000);
    proc.stdout.on("data", (chunk: Buffer) => {
      banner += chunk.toString("utf8");
      const hit = banner.match(/listening on 127\.0\.0\.1:(\d+)/);
      if (hit) {
        clearTimeout(timer);
        resolvePort({ proc, port: Number(hit[1]) });
      }
    });
    proc.on("exit", (code) => {
      clearTimeout(timer);
      reject(new Error(`server exited early with code ${code}: ${stderr}`));
    });
  });
}

function countsByRule(statuses: RuleStatus[]): Map<string, number> {
  return new Map(statuses.map((status) => [status.rule, status.currentMatchCount]));
}

function row(controller: SessionController, rule: string) {
  const found = ruleListRows(controller.state).find((candidate) => candidate.rule === rule);
  if (!found) throw new Error(`rule ${rule} missing from the rule list`);
  return found;
}

async function applyVisible(controller: SessionController, rule: string): Promise<void> {
  controller.selectRule(rule);
  const matches = row(controller, rule).matches;
  const first = matches[0];
  if (!first) throw new Error(`no matches listed for ${rule}`);
  controller.selectMatch(rule, first.matchId);
  await controller.applySelected();
}

describe("debugger UI against a live server", () => {
  let proc: ChildProcessWithoutNullStreams;
  let transport: TcpLineTransport;
  let client: WireClient;
  let controller: SessionController;

  beforeAll(async () => {
    const started = await startServer();
    proc = started.proc;
    transport = await TcpLineTransport.connect(started.port);
    client = new WireClient(transport);
    controller = new SessionController(client);
    await controller.connect();
  });

  afterAll(() => {
    transport?.close();
    proc?.kill();
  });

  it("shows rule-list counts equal to the overview response", async () => {
    const overview = (await client.request("overview")) as DataPackage;
    const expected = countsByRule(overview.statuses);
    const rows = ruleListRows(controller.state);
    expect(rows).toHaveLength(expected.size);
    for (const paneRow of rows) {
      expect(paneRow.matchCount).toBe(expected.get(paneRow.rule));
    }
    expect(expected.get(AXIOM)).toBe(1);
    expect(expected.get(ADMIN)).toBe(0);
  });

  it("drops the crossed-out styling on employee rules after the first admin application", async () => {
    expect(row(controller, EMPLOYEE_PC).crossedOut).toBe(true);
    expect(row(controller, EMPLOYEE_LAPTOP).crossedOut).toBe(true);

    await applyVisible(controller, AXIOM);
    expect(row(controller, EMPLOYEE_PC).crossedOut).toBe(true);

    await applyVisible(controller, ADMIN);
    expect(row(controller, EMPLOYEE_PC).crossedOut).toBe(false);
    expect(row(controller, EMPLOYEE_LAPTOP).crossedOut).toBe(false);
    expect(row(controller, EMPLOYEE_PC).dimmed).toBe(false);
  });

  it("grows the protocol by one and flips the competing count when an employee match is applied", async () => {
    expect(row(controller, EMPLOYEE_PC).matchCount).toBe(1);
    expect(row(controller, EMPLOYEE_LAPTOP).matchCount).toBe(1);
    const before = protocolRows(controller.state).length;

    await applyVisible(controller, EMPLOYEE_PC);

    const rows = protocolRows(controller.state);
    expect(rows).toHaveLength(before + 1);
    expect(rows[rows.length - 1]?.rule).toBe(EMPLOYEE_PC);
    expect(row(controller, EMPLOYEE_LAPTOP).matchCount).toBe(0);
    expect(row(controller, EMPLOYEE_PC).matchCount).toBe(0);
  });

  it("returns control to the UI in debug mode when resume hits a breakpoint", async () => {
    await controller.setBreakpoint({ kind: "STEP_COUNT", count: 1 });
    expect(controller.state.breakpoints).toHaveLength(1);

    const before = protocolRows(controller.state).length;
    await controller.resume(100);

    const pkg = controller.state.pkg;
    expect(pkg?.haltReason).toBe("BREAKPOINT");
    expect(pkg?.mode).toBe("DEBUG");
    expect(protocolRows(controller.state)).toHaveLength(before + 1);

    const bar = controlBar(controller.state);
    expect(controller.state.busy).toBe(false);
    expect(bar.resumeEnabled).toBe(true);
    expect(bar.saveSnapshotEnabled).toBe(true);
  });
});

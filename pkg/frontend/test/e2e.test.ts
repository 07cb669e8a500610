// Scripted operator session against the real stack: demo PKI, broker,
// agent, and ground station run as pqc2 subprocesses; the console code
// under test talks to the live bridge exactly as the browser would.
// Requires the pqc2 CLI on PATH (pip install -e .. from the repo root).

import { execFile, spawn, type ChildProcess } from "node:child_process";
import { existsSync } from "node:fs";
import { mkdtemp } from "node:fs/promises";
import Module from "node:module";
import net from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { ConsoleClient, type SocketFactory, type SocketLike } from "../src/client.js";
import { initialState, reduce, type Action, type ConsoleState } from "../src/reducer.js";

const require = Module.createRequire(import.meta.url);
// eslint-disable-next-line @typescript-eslint/no-var-requires
const WebSocket = require("ws") as typeof import("ws").default;

const HERE = fileURLToPath(new URL(".", import.meta.url));
const DIST = join(HERE, "..", "dist");
const RUN_SECONDS = "180";

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const srv = net.createServer();
    srv.once("error", reject);
    srv.listen(0, "127.0.0.1", () => {
      const port = (srv.address() as net.AddressInfo).port;
      srv.close(() => resolve(port));
    });
  });
}

function portIsFree(port: number): Promise<boolean> {
  return new Promise((resolve) => {
    const srv = net.createServer();
    srv.once("error", () => resolve(false));
    srv.listen(port, "127.0.0.1", () => srv.close(() => resolve(true)));
  });
}

/** The static UI sits one port above the bridge, so grab a free pair. */
async function freePortPair(): Promise<number> {
  for (let i = 0; i < 20; i++) {
    const port = await freePort();
    if (await portIsFree(port + 1)) return port;
  }
  throw new Error("no adjacent free port pair");
}

function waitFor(pred: () => boolean, ms: number, label: string): Promise<void> {
  return new Promise((resolve, reject) => {
    const start = Date.now();
    const tick = () => {
      if (pred()) return resolve();
      if (Date.now() - start > ms) return reject(new Error(`timed out waiting for ${label}`));
      setTimeout(tick, 50);
    };
    tick();
  });
}

function waitForPort(port: number, ms: number): Promise<void> {
  return new Promise((resolve, reject) => {
    const start = Date.now();
    const attempt = () => {
      const sock = net.connect(port, "127.0.0.1");
      sock.once("connect", () => {
        sock.destroy();
        resolve();
      });
      sock.once("error", () => {
        sock.destroy();
        if (Date.now() - start > ms) reject(new Error(`port ${port} never opened`));
        else setTimeout(attempt, 100);
      });
    };
    attempt();
  });
}

function runCli(args: string[], cwd: string): Promise<string> {
  return new Promise((resolve, reject) => {
    execFile("pqc2", args, { cwd, timeout: 60_000 }, (err, stdout, stderr) => {
      if (err) reject(new Error(`pqc2 ${args[0]} failed: ${stderr || err.message}`));
      else resolve(stdout);
    });
  });
}

// Browser WebSocket facade over the ws package, for node.
const wsFactory: SocketFactory = (url) => {
  const sock = new WebSocket(url);
  const like: SocketLike = {
    send: (d) => sock.send(d),
    close: () => sock.close(),
    onopen: null,
    onmessage: null,
    onclose: null,
    onerror: null,
  };
  sock.on("open", () => like.onopen?.());
  sock.on("message", (data) => like.onmessage?.({ data: data.toString() }));
  sock.on("close", () => like.onclose?.());
  sock.on("error", () => like.onerror?.());
  return like;
};

function identityFlags(subject: string): string[] {
  return [
    "--mode", "app-sig", "--subject", subject,
    "--cert", `demo/certs/${subject}.cert`, "--key", `demo/keys/${subject}.key`,
    "--ca", "demo/ca/ca.cert", "--peers", "demo/certs",
  ];
}

describe("operator session against a live stack", () => {
  let dir: string;
  let brokerPort: number;
  let consolePort: number;
  const children: ChildProcess[] = [];
  let client: ConsoleClient;
  let state: ConsoleState = initialState();
  let statusFrames = 0;
  const dispatch = (a: Action) => {
    if (a.type === "status") statusFrames += 1;
    state = reduce(state, a);
  };

  function daemon(args: string[]): ChildProcess {
    const child = spawn("pqc2", args, { cwd: dir, stdio: ["ignore", "pipe", "pipe"] });
    children.push(child);
    return child;
  }

  beforeAll(async () => {
    if (!existsSync(join(DIST, "index.html"))) {
      await new Promise<void>((resolve, reject) => {
        execFile("npm", ["run", "build"], { cwd: join(HERE, ".."), timeout: 120_000 },
          (err, _out, stderr) => (err ? reject(new Error(stderr)) : resolve()));
      });
    }
    dir = await mkdtemp(join(tmpdir(), "console-e2e-"));
    await runCli(["demo", "init", "demo"], dir);
    brokerPort = await freePort();
    consolePort = await freePortPair();

    daemon([
      "broker", "--listen", `127.0.0.1:${brokerPort}`, "--authz", "demo/authz.yaml",
      ...identityFlags("broker"), "--event-log", "events.jsonl",
      "--run-seconds", RUN_SECONDS,
    ]);
    await waitForPort(brokerPort, 20_000);

    daemon([
      "agent", "--broker", `127.0.0.1:${brokerPort}`,
      ...identityFlags("agent"), "--run-seconds", RUN_SECONDS,
    ]);
    daemon([
      "ground", "--broker", `127.0.0.1:${brokerPort}`,
      ...identityFlags("ground_station"),
      "--console-port", String(consolePort), "--serve-ui", DIST,
      "--watch-events", "events.jsonl", "--run-seconds", RUN_SECONDS,
    ]);
    await waitForPort(consolePort, 20_000);

    client = new ConsoleClient(`ws://127.0.0.1:${consolePort}/`, dispatch, {
      factory: wsFactory,
    });
    client.connect();
    await waitFor(() => state.connection === "live", 20_000, "live bridge link");
  }, 90_000);

  afterAll(() => {
    client?.close();
    for (const child of children) child.kill("SIGTERM");
  });

  it("serves the built console page next to the bridge", async () => {
    const page = await fetch(`http://127.0.0.1:${consolePort + 1}/index.html`);
    expect(page.status).toBe(200);
    expect(await page.text()).toContain("ground station console");
    const js = await fetch(`http://127.0.0.1:${consolePort + 1}/main.js`);
    expect(js.status).toBe(200);
  });

  it("receives telemetry once live", async () => {
    await waitFor(() => state.status !== null, 15_000, "first status frame");
    expect(state.status?.estop).toBe(false);
  });

  it("drives the agent forward and sees x increase", async () => {
    const startX = state.status?.x ?? 0;
    // held-key behaviour: pump at the client's own 10 Hz budget, since
    // the agent drops a command held longer than its hold window
    const pump = setInterval(() => client.sendCommand(1.0, 0.0), 100);
    try {
      await waitFor(
        () => (state.status?.x ?? 0) > startX + 0.3,
        30_000,
        "x to advance under forward velocity",
      );
    } finally {
      clearInterval(pump);
    }
    expect(state.sentCmds).toBeGreaterThan(0);
  }, 40_000);

  it("engages e-stop and the pose freezes", async () => {
    expect(client.sendEstop(true)).toBe(true);
    await waitFor(() => state.status?.estop === true, 15_000, "e-stop confirmation");
    const frozen = state.status;
    const framesThen = statusFrames;
    // fresh statuses must keep flowing with a bit-identical pose
    await waitFor(() => statusFrames > framesThen + 10, 15_000, "post-stop telemetry");
    expect(state.status?.x).toBe(frozen?.x);
    expect(state.status?.y).toBe(frozen?.y);
    expect(state.status?.theta).toBe(frozen?.theta);
    expect(state.status?.estop).toBe(true);
  }, 40_000);

  it("renders AuthzDenied after an attacker run", async () => {
    const report = await runCli(
      [
        "attacker", "--broker", `127.0.0.1:${brokerPort}`,
        ...identityFlags("attacker"),
        "--kind", "unauthorized_publish", "--topic", "/command",
      ],
      dir,
    );
    expect(JSON.parse(report).registered).toBe(false);
    await waitFor(
      () => state.events.some((e) => e.kind === "AuthzDenied"),
      15_000,
      "AuthzDenied in the console feed",
    );
    const denial = state.events.find((e) => e.kind === "AuthzDenied");
    expect(denial?.subject).toBe("attacker");
    expect(denial?.topic).toBe("/command");
    expect(state.events.length).toBeLessThanOrEqual(200);
    expect(state.connection).toBe("live");
  }, 40_000);
});

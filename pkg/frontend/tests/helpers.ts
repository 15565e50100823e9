// Boots the real backend for tests and tears it down afterwards. Each
// server gets a fresh storage directory and a random high port. Also holds
// the scaffolding for mounting the app against that backend.
import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { Api, DyadProfile } from "../src/api.js";
import { App, AppOptions } from "../src/app.js";
import { Recorder, VoicePlayer } from "../src/media.js";

export interface TestServer {
  baseUrl: string;
  stop(): Promise<void>;
  /** Kill the process but keep storage, then boot a new process on the
   *  same port and storage. Simulates a service restart. */
  restart(): Promise<void>;
}

const HEALTH_TRIES = 100;
const HEALTH_INTERVAL_MS = 200;

function randomPort(): number {
  return 20000 + Math.floor(Math.random() * 20000);
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function waitHealthy(baseUrl: string, child: ChildProcess): Promise<boolean> {
  for (let i = 0; i < HEALTH_TRIES; i++) {
    if (child.exitCode !== null) return false;
    try {
      const res = await fetch(`${baseUrl}/health`);
      if (res.ok) return true;
    } catch {
      // not up yet
    }
    await sleep(HEALTH_INTERVAL_MS);
  }
  return false;
}

function launch(port: number, storage: string): ChildProcess {
  const child = spawn(
    "turntalk",
    ["serve", "--port", String(port), "--storage", storage, "--providers", "mock"],
    { stdio: ["ignore", "pipe", "pipe"] },
  );
  child.stdout?.resume();
  child.stderr?.resume();
  return child;
}

async function shutdown(child: ChildProcess): Promise<void> {
  if (child.exitCode !== null) return;
  const gone = new Promise<void>((resolve) => child.once("exit", () => resolve()));
  child.kill("SIGTERM");
  await Promise.race([gone, sleep(5000)]);
  if (child.exitCode === null) child.kill("SIGKILL");
  await gone;
}

export async function startServer(): Promise<TestServer> {
  const storage = mkdtempSync(join(tmpdir(), "companion-ui-test-"));
  // The port is picked blind, so collisions with another process are
  // possible; try a few before giving up.
  for (let attempt = 0; attempt < 3; attempt++) {
    const port = randomPort();
    const baseUrl = `http://127.0.0.1:${port}`;
    let child = launch(port, storage);
    if (await waitHealthy(baseUrl, child)) {
      return {
        baseUrl,
        async stop() {
          await shutdown(child);
          rmSync(storage, { recursive: true, force: true });
        },
        async restart() {
          await shutdown(child);
          child = launch(port, storage);
          if (!(await waitHealthy(baseUrl, child))) {
            throw new Error("backend did not come back after restart");
          }
        },
      };
    }
    await shutdown(child);
  }
  rmSync(storage, { recursive: true, force: true });
  throw new Error("could not start a backend for tests");
}

// -- app scaffolding --------------------------------------------------------

export class FakePlayer implements VoicePlayer {
  played: string[] = [];
  play(url: string): void {
    this.played.push(url);
  }
}

export class FakeRecorder implements Recorder {
  active = false;
  constructor(private produce: () => Blob) {}
  start(): Promise<void> {
    this.active = true;
    return Promise.resolve();
  }
  stop(): Promise<Blob> {
    this.active = false;
    return Promise.resolve(this.produce());
  }
}

export const DYAD_DEFAULTS = {
  parent_role: "mother",
  child_name: "Mina",
  child_age: 6,
  locale_source: "en",
  locale_target: "en",
  interests: ["trains", "dinosaurs"],
};

export async function createDyad(
  api: Api,
  dyadId: string,
  overrides: Record<string, unknown> = {},
): Promise<DyadProfile> {
  return api.createDyad({ dyad_id: dyadId, ...DYAD_DEFAULTS, ...overrides } as never);
}

export interface Mounted {
  app: App;
  root: HTMLElement;
  api: Api;
  player: FakePlayer;
}

// A fresh root plus a started App, like opening the page for this dyad.
export async function mount(
  baseUrl: string,
  dyadId: string,
  options: AppOptions = {},
): Promise<Mounted> {
  const api = new Api(baseUrl);
  const dyad = await api.getDyad(dyadId);
  const root = document.createElement("div");
  document.body.appendChild(root);
  const player = new FakePlayer();
  const app = new App(root, api, dyad, { player, micAvailable: false, ...options });
  await app.start();
  return { app, root, api, player };
}

// Tear the current app down and mount again: the page-reload simulation.
// Only localStorage and the server survive the swap.
export async function remount(baseUrl: string, dyadId: string, old: Mounted): Promise<Mounted> {
  old.app.destroy();
  old.root.remove();
  return mount(baseUrl, dyadId);
}

export function screenOf(root: HTMLElement): string {
  return root.dataset.screen ?? "";
}

export function texts(root: ParentNode, selector: string): string[] {
  return Array.from(root.querySelectorAll(selector)).map((node) => node.textContent ?? "");
}

export function click(node: Element | null): void {
  if (!node) throw new Error("tried to click a missing element");
  (node as HTMLElement).click();
}

// Page entry point. The dyad is chosen with ?dyad=<id>; ?api=<base> points
// at the service when the static files are hosted elsewhere.
import { Api, ApiError } from "./api.js";
import { App } from "./app.js";

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) throw new Error("Could not find #app root element");

  const params = new URLSearchParams(window.location.search);
  const dyadId = params.get("dyad");
  const api = new Api(params.get("api") || "");

  if (!dyadId) {
    root.textContent = "Add ?dyad=<id> to the address to open a family's screen.";
    return;
  }

  try {
    const dyad = await api.getDyad(dyadId);
    const app = new App(root, api, dyad);
    await app.start();
  } catch (err) {
    root.textContent =
      err instanceof ApiError && err.status === 404
        ? `No family profile named "${dyadId}" is registered.`
        : `Could not reach the conversation service: ${err instanceof Error ? err.message : err}`;
  }
}

void boot();

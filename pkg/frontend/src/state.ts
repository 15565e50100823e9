// Client-side projection of the server snapshot. The screen is a pure
// function of the session view; no conversation rule lives on this side.
import { SessionView } from "./api.js";

export type Screen = "topic" | "parent_turn" | "child_turn" | "celebration";

export function screenFor(view: SessionView | null): Screen {
  if (view === null) return "topic";
  if (view.state === "parent_turn") return "parent_turn";
  if (view.state === "child_turn") return "child_turn";
  return "celebration";
}

// The active session id is remembered per dyad so a page reload can pick
// the conversation back up from the server snapshot.
function pointerKey(dyadId: string): string {
  return `companion-ui.session.${dyadId}`;
}

export function saveSessionPointer(dyadId: string, sessionId: string): void {
  try {
    localStorage.setItem(pointerKey(dyadId), sessionId);
  } catch {
    // storage may be unavailable; reload-resume simply won't work
  }
}

export function loadSessionPointer(dyadId: string): string | null {
  try {
    return localStorage.getItem(pointerKey(dyadId));
  } catch {
    return null;
  }
}

export function clearSessionPointer(dyadId: string): void {
  try {
    localStorage.removeItem(pointerKey(dyadId));
  } catch {
    // nothing to clean up if storage is unavailable
  }
}

// Typed client for the conversation service HTTP API. Response shapes
// mirror the server's JSON exactly; nothing is reinterpreted here.

export type TopicKind = "plan" | "recall" | "interest";
export type SessionStateName = "parent_turn" | "child_turn" | "ended";
export type PassSource = "hardware_button" | "ui_button";
export type CardCategoryName = "topic" | "action" | "emotion" | "core";

export interface Topic {
  kind: TopicKind;
  interest_label: string | null;
}

export interface Guide {
  guide_id: string;
  direction: string;
  text_canonical: string;
  text: string;
  untranslated: boolean;
  example_canonical: string | null;
  example: string | null;
  example_untranslated: boolean;
}

export interface Feedback {
  category: "blame" | "correction" | "complex";
  text_canonical: string;
  text: string;
  regarding_turn: number;
  untranslated: boolean;
}

export interface GuideTurn {
  turn_index: number;
  guides: Guide[];
  feedback: Feedback | null;
}

export type ImageRef =
  | { kind: "symbol"; symbol_id: string }
  | { kind: "custom"; asset_id: string }
  | { kind: "placeholder" };

export interface Card {
  card_id: string;
  category: CardCategoryName;
  label_canonical: string;
  label_localized: string;
  image_ref: ImageRef;
  voice_ref: string | null;
  untranslated: boolean;
}

export interface Deck {
  deck_id: string;
  session_id: string;
  turn_index: number;
  ordinal: number;
  cards: Card[];
}

export interface Selection {
  card_id: string;
  category: CardCategoryName;
  label_canonical: string;
  label_localized: string;
  at: string;
}

export interface HistoryMessage {
  speaker: "parent" | "child";
  turn_index: number;
  started_at: string;
  ended_at: string;
  parent_text: string | null;
  child_cards: string[] | null;
}

export interface SessionView {
  session_id: string;
  dyad_id: string;
  topic: Topic;
  state: SessionStateName;
  turn_index: number;
  exchanges: number;
  stars: number | null;
  pending_text: string | null;
  history: HistoryMessage[];
  guide_turn: GuideTurn | null;
  deck: Deck | null;
  selections: Selection[];
}

export interface DyadProfile {
  dyad_id: string;
  parent_role: "mother" | "father";
  child_name: string;
  child_age: number;
  child_characteristics: string;
  interests: string[];
  custom_images: Record<string, string>;
  locale_source: string;
  locale_target: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function errorFrom(res: Response): Promise<ApiError> {
  let code = `HTTP${res.status}`;
  let message = res.statusText;
  try {
    const body = await res.json();
    if (typeof body.code === "string") code = body.code;
    if (typeof body.message === "string") message = body.message;
  } catch {
    // keep the status-line fallback
  }
  return new ApiError(res.status, code, message);
}

function readBlob(blob: Blob): Promise<Uint8Array> {
  if (typeof blob.arrayBuffer === "function") {
    return blob.arrayBuffer().then((buf) => new Uint8Array(buf));
  }
  // Some DOM implementations only offer FileReader.
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    reader.onload = () => resolve(new Uint8Array(reader.result as ArrayBuffer));
    reader.onerror = () => reject(reader.error ?? new Error("could not read blob"));
    reader.readAsArrayBuffer(blob);
  });
}

// Multipart body built by hand so uploads behave identically under every
// fetch implementation; FormData encodings differ across environments.
function multipartBody(
  field: string,
  filename: string,
  contentType: string,
  data: Uint8Array,
): { body: Uint8Array<ArrayBuffer>; contentType: string } {
  const boundary = "----companion-ui-" + Math.random().toString(16).slice(2);
  const encoder = new TextEncoder();
  const head = encoder.encode(
    `--${boundary}\r\n` +
      `Content-Disposition: form-data; name="${field}"; filename="${filename}"\r\n` +
      `Content-Type: ${contentType}\r\n\r\n`,
  );
  const tail = encoder.encode(`\r\n--${boundary}--\r\n`);
  const body = new Uint8Array(head.length + data.length + tail.length);
  body.set(head, 0);
  body.set(data, head.length);
  body.set(tail, head.length + data.length);
  return { body, contentType: `multipart/form-data; boundary=${boundary}` };
}

export class Api {
  constructor(public baseUrl: string) {}

  private async request(path: string, init?: RequestInit): Promise<any> {
    const res = await fetch(`${this.baseUrl}${path}`, init);
    if (!res.ok) throw await errorFrom(res);
    return res.json();
  }

  private postJson(path: string, payload: unknown): Promise<any> {
    return this.request(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  assetUrl(assetId: string): string {
    return `${this.baseUrl}/assets/${encodeURIComponent(assetId)}`;
  }

  getDyad(dyadId: string): Promise<DyadProfile> {
    return this.request(`/dyads/${encodeURIComponent(dyadId)}`);
  }

  createDyad(record: Partial<DyadProfile>): Promise<DyadProfile> {
    return this.postJson("/dyads", record);
  }

  startSession(dyadId: string, topic: { kind: TopicKind; interest_label?: string }): Promise<SessionView> {
    return this.postJson("/sessions", { dyad_id: dyadId, topic });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}`);
  }

  submitUtteranceText(sessionId: string, text: string): Promise<SessionView> {
    return this.postJson(`/sessions/${encodeURIComponent(sessionId)}/utterance`, { text });
  }

  async submitUtteranceAudio(sessionId: string, audio: Blob): Promise<SessionView> {
    const bytes = await readBlob(audio);
    const part = multipartBody("audio", "utterance.webm", audio.type || "application/octet-stream", bytes);
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/utterance/audio`, {
      method: "POST",
      headers: { "Content-Type": part.contentType },
      body: part.body,
    });
  }

  revealExample(sessionId: string, guideId: string): Promise<SessionView> {
    return this.request(
      `/sessions/${encodeURIComponent(sessionId)}/guides/${encodeURIComponent(guideId)}/example`,
      { method: "POST" },
    );
  }

  passTurn(sessionId: string, fromState: SessionStateName, source: PassSource): Promise<SessionView> {
    return this.postJson(`/sessions/${encodeURIComponent(sessionId)}/pass`, {
      from_state: fromState,
      source,
    });
  }

  selectCard(sessionId: string, cardId: string): Promise<SessionView> {
    return this.request(
      `/sessions/${encodeURIComponent(sessionId)}/cards/${encodeURIComponent(cardId)}/select`,
      { method: "POST" },
    );
  }

  deselectCard(sessionId: string, position: number): Promise<SessionView> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/selections/${position}`, {
      method: "DELETE",
    });
  }

  refreshDeck(sessionId: string): Promise<SessionView> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/deck/refresh`, {
      method: "POST",
    });
  }

  endSession(sessionId: string): Promise<SessionView> {
    return this.request(`/sessions/${encodeURIComponent(sessionId)}/end`, { method: "POST" });
  }
}

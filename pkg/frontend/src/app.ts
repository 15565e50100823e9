// Wires screens to the API. All conversation state lives on the server;
// the app holds only the latest snapshot plus transient UI bits (banner,
// recording flag, the one optimistic strip item awaiting confirmation).
import { Api, ApiError, Card, DyadProfile, SessionView, TopicKind } from "./api.js";
import { canRecord, HtmlAudioPlayer, MicRecorder, Recorder, VoicePlayer } from "./media.js";
import {
  clearSessionPointer,
  loadSessionPointer,
  saveSessionPointer,
  screenFor,
} from "./state.js";
import {
  renderCelebration,
  renderChildTurn,
  renderParentTurn,
  renderTopicScreen,
} from "./screens.js";

export interface AppOptions {
  player?: VoicePlayer;
  recorder?: Recorder;
  micAvailable?: boolean;
}

export class App {
  view: SessionView | null = null;
  banner: string | null = null;
  recording = false;
  pendingSelection: Card | null = null;

  private player: VoicePlayer;
  private recorder: Recorder;
  private micAvailable: boolean;
  private keyHandler: (event: KeyboardEvent) => void;

  constructor(
    private root: HTMLElement,
    private api: Api,
    private dyad: DyadProfile,
    options: AppOptions = {},
  ) {
    this.player = options.player ?? new HtmlAudioPlayer();
    this.recorder = options.recorder ?? new MicRecorder();
    this.micAvailable = options.micAvailable ?? canRecord();
    this.keyHandler = (event) => this.onKey(event);
    document.addEventListener("keydown", this.keyHandler);
  }

  destroy(): void {
    document.removeEventListener("keydown", this.keyHandler);
  }

  // Resume the stored session if the server still knows it; otherwise the
  // topic screen. Called once after construction.
  async start(): Promise<void> {
    const sessionId = loadSessionPointer(this.dyad.dyad_id);
    if (sessionId) {
      try {
        this.view = await this.api.getSession(sessionId);
      } catch (err) {
        if (err instanceof ApiError && err.status === 404) {
          clearSessionPointer(this.dyad.dyad_id);
        } else {
          this.banner = messageOf(err);
        }
      }
    }
    this.render();
  }

  render(): void {
    switch (screenFor(this.view)) {
      case "topic":
        renderTopicScreen(this.root, {
          dyad: this.dyad,
          banner: this.banner,
          startTopic: (kind, interestLabel) => void this.startTopic(kind, interestLabel),
        });
        break;
      case "parent_turn":
        renderParentTurn(this.root, this.view!, {
          banner: this.banner,
          recording: this.recording,
          micAvailable: this.micAvailable,
          revealExample: (guideId) => void this.revealExample(guideId),
          submitText: (text) => void this.submitText(text),
          toggleRecording: () => void this.toggleRecording(),
          passTurn: () => void this.passTurn("ui_button"),
          endConversation: () => void this.endConversation(),
        });
        break;
      case "child_turn":
        renderChildTurn(this.root, this.view!, {
          assetUrl: (assetId) => this.api.assetUrl(assetId),
          pendingSelection: this.pendingSelection,
          selectCard: (card) => void this.selectCard(card),
          removeSelection: (position) => void this.removeSelection(position),
          refreshDeck: () => void this.refreshDeck(),
          passTurn: () => void this.passTurn("ui_button"),
        });
        break;
      case "celebration":
        renderCelebration(this.root, this.view!, {
          newConversation: () => this.newConversation(),
        });
        break;
    }
  }

  // -- actions ------------------------------------------------------------

  async startTopic(kind: TopicKind, interestLabel?: string): Promise<void> {
    await this.apply(() =>
      this.api.startSession(this.dyad.dyad_id, {
        kind,
        ...(interestLabel !== undefined ? { interest_label: interestLabel } : {}),
      }),
    );
    if (this.view) saveSessionPointer(this.dyad.dyad_id, this.view.session_id);
  }

  async revealExample(guideId: string): Promise<void> {
    if (!this.view) return;
    await this.apply(() => this.api.revealExample(this.view!.session_id, guideId));
  }

  async submitText(text: string): Promise<void> {
    if (!this.view) return;
    await this.apply(() => this.api.submitUtteranceText(this.view!.session_id, text));
  }

  async submitAudio(audio: Blob): Promise<void> {
    if (!this.view) return;
    await this.apply(() => this.api.submitUtteranceAudio(this.view!.session_id, audio));
  }

  async toggleRecording(): Promise<void> {
    if (!this.recording) {
      try {
        await this.recorder.start();
        this.recording = true;
      } catch (err) {
        this.banner = messageOf(err);
      }
      this.render();
      return;
    }
    const audio = await this.recorder.stop();
    this.recording = false;
    this.render();
    await this.submitAudio(audio);
  }

  async passTurn(source: "ui_button" | "hardware_button"): Promise<void> {
    const view = this.view;
    if (!view || (view.state !== "parent_turn" && view.state !== "child_turn")) return;
    await this.apply(() => this.api.passTurn(view.session_id, view.state, source), {
      calm: view.state === "child_turn",
    });
  }

  async selectCard(card: Card): Promise<void> {
    if (!this.view) return;
    if (card.voice_ref) this.player.play(this.api.assetUrl(card.voice_ref));
    // Optimistic: the strip shows the card before the server confirms.
    this.pendingSelection = card;
    this.render();
    await this.apply(() => this.api.selectCard(this.view!.session_id, card.card_id), {
      calm: true,
    });
    this.pendingSelection = null;
    this.render();
  }

  async removeSelection(position: number): Promise<void> {
    if (!this.view) return;
    await this.apply(() => this.api.deselectCard(this.view!.session_id, position), {
      calm: true,
    });
  }

  async refreshDeck(): Promise<void> {
    if (!this.view) return;
    await this.apply(() => this.api.refreshDeck(this.view!.session_id), { calm: true });
  }

  async endConversation(): Promise<void> {
    if (!this.view) return;
    // The pointer stays: reloading during the celebration shows it again.
    await this.apply(() => this.api.endSession(this.view!.session_id));
  }

  newConversation(): void {
    clearSessionPointer(this.dyad.dyad_id);
    this.view = null;
    this.banner = null;
    this.render();
  }

  // Run one server call and re-render from its snapshot. `calm` suppresses
  // the error banner for child-facing actions, which roll back silently.
  private async apply(
    op: () => Promise<SessionView>,
    options: { calm?: boolean } = {},
  ): Promise<void> {
    try {
      this.view = await op();
      this.banner = null;
    } catch (err) {
      if (!options.calm) this.banner = messageOf(err);
    }
    this.render();
  }

  // Space is the on-screen pass surrogate; a keyboard-emulating physical
  // button is expected to send Enter, so that key reports hardware_button.
  private onKey(event: KeyboardEvent): void {
    const target = event.target as HTMLElement | null;
    const tag = target?.tagName;
    if (tag === "INPUT" || tag === "TEXTAREA" || target?.isContentEditable) return;
    if (event.key === " ") {
      event.preventDefault();
      void this.passTurn("ui_button");
    } else if (event.key === "Enter") {
      event.preventDefault();
      void this.passTurn("hardware_button");
    }
  }
}

function messageOf(err: unknown): string {
  if (err instanceof ApiError) return err.message;
  return err instanceof Error ? err.message : String(err);
}

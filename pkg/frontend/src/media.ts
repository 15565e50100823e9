// Audio output and microphone capture, both isolated behind small
// seams so the rest of the app can run where real media APIs are absent.

export interface VoicePlayer {
  play(url: string): void;
}

export class HtmlAudioPlayer implements VoicePlayer {
  play(url: string): void {
    const audio = new Audio(url);
    const playing = audio.play();
    // Some environments return a promise here, some return nothing.
    if (playing && typeof playing.catch === "function") {
      playing.catch(() => {});
    }
  }
}

export function canRecord(): boolean {
  return (
    typeof MediaRecorder !== "undefined" &&
    typeof navigator !== "undefined" &&
    !!navigator.mediaDevices &&
    typeof navigator.mediaDevices.getUserMedia === "function"
  );
}

export interface Recorder {
  readonly active: boolean;
  start(): Promise<void>;
  stop(): Promise<Blob>;
}

// One start/stop cycle of microphone capture producing a single blob.
export class MicRecorder implements Recorder {
  private recorder: MediaRecorder | null = null;
  private chunks: Blob[] = [];

  get active(): boolean {
    return this.recorder !== null;
  }

  async start(): Promise<void> {
    const stream = await navigator.mediaDevices.getUserMedia({ audio: true });
    this.chunks = [];
    this.recorder = new MediaRecorder(stream);
    this.recorder.ondataavailable = (event: BlobEvent) => {
      if (event.data.size > 0) this.chunks.push(event.data);
    };
    this.recorder.start();
  }

  stop(): Promise<Blob> {
    const recorder = this.recorder;
    if (!recorder) return Promise.reject(new Error("recorder is not running"));
    return new Promise((resolve) => {
      recorder.onstop = () => {
        recorder.stream.getTracks().forEach((track) => track.stop());
        this.recorder = null;
        resolve(new Blob(this.chunks, { type: recorder.mimeType || "audio/webm" }));
      };
      recorder.stop();
    });
  }
}

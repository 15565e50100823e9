// Screen renderers. Every screen is rebuilt from the latest server
// snapshot; these functions translate one view into DOM and wire taps to
// the actions the app provides. They hold no conversation state.
import { Card, CardCategoryName, DyadProfile, ImageRef, SessionView, TopicKind } from "./api.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function notice(message: string | null): HTMLElement | null {
  if (!message) return null;
  return el("div", "notice-banner", message);
}

// -- topic ----------------------------------------------------------------

export interface TopicScreenContext {
  dyad: DyadProfile;
  banner: string | null;
  startTopic(kind: TopicKind, interestLabel?: string): void;
}

const TOPIC_TILES: Array<{ kind: TopicKind; title: string; hint: string }> = [
  { kind: "plan", title: "Plan", hint: "Talk about what comes next" },
  { kind: "recall", title: "Recall", hint: "Talk about what happened" },
  { kind: "interest", title: "Interest", hint: "Talk about a favorite thing" },
];

export function renderTopicScreen(root: HTMLElement, ctx: TopicScreenContext): void {
  root.replaceChildren();
  root.dataset.screen = "topic";

  const screen = el("div", "screen topic-screen");
  const banner = notice(ctx.banner);
  if (banner) screen.appendChild(banner);
  screen.appendChild(el("h1", "screen-title", "Start a conversation"));

  const tiles = el("div", "topic-tiles");
  for (const tile of TOPIC_TILES) {
    const button = el("button", "tile topic-tile");
    button.dataset.kind = tile.kind;
    button.appendChild(el("span", "tile-title", tile.title));
    button.appendChild(el("span", "tile-hint", tile.hint));
    if (tile.kind === "interest" && ctx.dyad.interests.length === 0) {
      button.disabled = true;
      button.appendChild(
        el("span", "tile-disabled-hint", "Add interests to the profile to use this"),
      );
    } else if (tile.kind === "interest") {
      button.addEventListener("click", () => showInterestPicker(screen, ctx));
    } else {
      button.addEventListener("click", () => ctx.startTopic(tile.kind));
    }
    tiles.appendChild(button);
  }
  screen.appendChild(tiles);
  root.appendChild(screen);
}

function showInterestPicker(screen: HTMLElement, ctx: TopicScreenContext): void {
  const existing = screen.querySelector(".interest-picker");
  if (existing) existing.remove();

  const picker = el("div", "interest-picker");
  picker.appendChild(el("h2", "picker-title", `${ctx.dyad.child_name} likes...`));
  const list = el("div", "interest-options");
  for (const interest of ctx.dyad.interests) {
    const option = el("button", "tile interest-option", interest);
    option.dataset.interest = interest;
    option.addEventListener("click", () => ctx.startTopic("interest", interest));
    list.appendChild(option);
  }
  picker.appendChild(list);
  const cancel = el("button", "picker-cancel", "Back");
  cancel.addEventListener("click", () => picker.remove());
  picker.appendChild(cancel);
  screen.appendChild(picker);
}

// -- parent turn ----------------------------------------------------------

export interface ParentScreenContext {
  banner: string | null;
  recording: boolean;
  micAvailable: boolean;
  revealExample(guideId: string): void;
  submitText(text: string): void;
  toggleRecording(): void;
  passTurn(): void;
  endConversation(): void;
}

export function renderParentTurn(
  root: HTMLElement,
  view: SessionView,
  ctx: ParentScreenContext,
): void {
  root.replaceChildren();
  root.dataset.screen = "parent_turn";

  const screen = el("div", "screen parent-screen");
  if (ctx.recording) screen.appendChild(el("div", "recording-dot"));
  screen.appendChild(parentMenu(ctx));

  const banner = notice(ctx.banner);
  if (banner) screen.appendChild(banner);

  const turn = view.guide_turn;
  if (turn?.feedback) {
    screen.appendChild(el("div", "feedback-banner", turn.feedback.text));
  }

  const guides = el("div", "guide-list");
  for (const guide of turn?.guides ?? []) {
    const card = el("div", "guide-card");
    card.dataset.guideId = guide.guide_id;
    card.appendChild(el("span", "guide-direction", guide.direction));
    card.appendChild(el("p", "guide-text", guide.text));
    if (guide.example !== null) {
      card.appendChild(el("p", "guide-example", guide.example));
    } else {
      card.classList.add("unrevealed");
      card.appendChild(el("span", "guide-reveal-hint", "Tap for an example"));
      card.addEventListener("click", () => ctx.revealExample(guide.guide_id));
    }
    guides.appendChild(card);
  }
  screen.appendChild(guides);

  const staged = el("div", "pending-area");
  if (view.pending_text) {
    staged.appendChild(el("p", "pending-text", view.pending_text));
  } else {
    staged.appendChild(el("p", "pending-hint", "Speak or type, then pass the turn"));
  }
  screen.appendChild(staged);

  const entry = el("div", "entry-row");
  if (ctx.micAvailable) {
    const mic = el("button", "mic-button", ctx.recording ? "Stop" : "Speak");
    mic.addEventListener("click", () => ctx.toggleRecording());
    entry.appendChild(mic);
  }
  const fallback = el("form", "text-fallback");
  const input = el("input");
  input.type = "text";
  input.placeholder = "Type what you said";
  const send = el("button", "text-send", "Send");
  send.type = "submit";
  fallback.appendChild(input);
  fallback.appendChild(send);
  fallback.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value.trim();
    if (text) ctx.submitText(text);
  });
  entry.appendChild(fallback);
  screen.appendChild(entry);

  screen.appendChild(passBar(ctx.passTurn));
  root.appendChild(screen);
}

function parentMenu(ctx: { endConversation(): void }): HTMLElement {
  const menu = el("details", "parent-menu");
  menu.appendChild(el("summary", "menu-toggle", "Menu"));
  const endButton = el("button", "end-button", "End conversation");
  endButton.addEventListener("click", () => ctx.endConversation());
  menu.appendChild(endButton);
  return menu;
}

function passBar(onPass: () => void): HTMLElement {
  const bar = el("button", "pass-bar", "Pass the turn");
  bar.addEventListener("click", () => onPass());
  return bar;
}

// -- child turn -----------------------------------------------------------

export interface ChildScreenContext {
  assetUrl(assetId: string): string;
  pendingSelection: Card | null;
  selectCard(card: Card): void;
  removeSelection(position: number): void;
  refreshDeck(): void;
  passTurn(): void;
}

const SECTION_ORDER: Array<{ category: CardCategoryName; title: string }> = [
  { category: "topic", title: "Topic" },
  { category: "action", title: "Action" },
  { category: "emotion", title: "Emotion" },
  { category: "core", title: "Core" },
];

export function renderChildTurn(
  root: HTMLElement,
  view: SessionView,
  ctx: ChildScreenContext,
): void {
  root.replaceChildren();
  root.dataset.screen = "child_turn";

  const screen = el("div", "screen child-screen");

  const strip = el("div", "selection-strip");
  view.selections.forEach((selection, position) => {
    const item = el("button", "strip-item", selection.label_localized);
    item.dataset.position = String(position);
    item.addEventListener("click", () => ctx.removeSelection(position));
    strip.appendChild(item);
  });
  if (ctx.pendingSelection) {
    strip.appendChild(
      el("span", "strip-item pending", ctx.pendingSelection.label_localized),
    );
  }
  screen.appendChild(strip);

  const grid = el("div", "card-grid");
  const cards = view.deck?.cards ?? [];
  for (const section of SECTION_ORDER) {
    const block = el("section", "card-section");
    block.dataset.category = section.category;
    block.appendChild(el("h2", "section-title", section.title));
    const row = el("div", "card-row");
    for (const card of cards.filter((c) => c.category === section.category)) {
      row.appendChild(cardTile(card, ctx));
    }
    block.appendChild(row);
    grid.appendChild(block);
  }
  screen.appendChild(grid);

  const refresh = el("button", "refresh-button", "More cards");
  refresh.addEventListener("click", () => ctx.refreshDeck());
  screen.appendChild(refresh);

  screen.appendChild(passBar(ctx.passTurn));
  root.appendChild(screen);
}

function cardTile(card: Card, ctx: ChildScreenContext): HTMLElement {
  const tile = el("button", "card");
  tile.dataset.cardId = card.card_id;
  tile.appendChild(cardImage(card.image_ref, card.label_localized, ctx.assetUrl));
  tile.appendChild(el("span", "card-label", card.label_localized));
  tile.addEventListener("click", () => ctx.selectCard(card));
  return tile;
}

function cardImage(
  ref: ImageRef,
  label: string,
  assetUrl: (assetId: string) => string,
): HTMLElement {
  if (ref.kind === "symbol") {
    const img = el("img", "card-image");
    // Symbol artwork ships with the client as static files keyed by id.
    img.src = `symbols/${encodeURIComponent(ref.symbol_id)}.svg`;
    img.alt = "";
    return img;
  }
  if (ref.kind === "custom") {
    const img = el("img", "card-image");
    img.src = assetUrl(ref.asset_id);
    img.alt = "";
    return img;
  }
  return el("div", "card-image placeholder", label.slice(0, 1).toUpperCase());
}

// -- celebration ----------------------------------------------------------

export interface CelebrationContext {
  newConversation(): void;
}

export function renderCelebration(
  root: HTMLElement,
  view: SessionView,
  ctx: CelebrationContext,
): void {
  root.replaceChildren();
  root.dataset.screen = "celebration";

  const screen = el("div", "screen celebration-screen");
  const stars = view.stars ?? 0;
  const row = el("div", "stars", "★".repeat(stars));
  row.dataset.count = String(stars);
  row.setAttribute("aria-label", `${stars} stars`);
  screen.appendChild(row);
  screen.appendChild(el("p", "celebration-message", "That was a great conversation!"));

  const again = el("button", "tile new-conversation", "Start a new conversation");
  again.addEventListener("click", () => ctx.newConversation());
  screen.appendChild(again);
  root.appendChild(screen);
}

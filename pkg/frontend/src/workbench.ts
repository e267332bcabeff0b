/** The annotator workbench: assigned files, token tagging via the palette,
 * auto-tag, sentence editing with preserved tags, the shared lexicon form,
 * lexicon-driven suggestions, a gloss pane and notices.
 *
 * Writes are optimistic: the DOM updates immediately, the API call follows,
 * and on error the file is re-fetched so the view equals the server again.
 */

import { ApiClient, ApiError } from "./api";
import { Poller } from "./polling";
import { renderTagPalette, tagForKey } from "./tagging";
import type { FileRow, FileView, Session } from "./types";

export class AnnotatorWorkbench {
  file: FileView | null = null;
  lexicon: Record<string, string> = {};
  lexiconVersion = 0;
  selected: { sid: string; index: number } | null = null;
  private poller: Poller;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private session: Session,
    pollIntervalMs?: number,
  ) {
    this.poller = new Poller(() => this.pollShared(), pollIntervalMs);
  }

  get language(): string {
    return this.session.user.role.language ?? "";
  }

  async start(): Promise<void> {
    const sync = await this.api.lexicon(this.language);
    this.lexicon = sync.entries ?? {};
    this.lexiconVersion = sync.version;
    await this.refresh();
    this.poller.start();
  }

  stop(): void {
    this.poller.stop();
  }

  /** Poll shared state: lexicon deltas (suggestions re-render, user tags kept). */
  async pollShared(): Promise<void> {
    try {
      const sync = await this.api.lexicon(this.language, this.lexiconVersion);
      if (sync.version !== this.lexiconVersion) {
        for (const change of sync.delta ?? []) {
          if (change.tag === null) delete this.lexicon[change.surface];
          else this.lexicon[change.surface] = change.tag;
        }
        this.lexiconVersion = sync.version;
        this.renderSentences();
      }
    } catch {
      /* transient poll errors surface on the next manual action */
    }
  }

  async refresh(): Promise<void> {
    const report = await this.api.progress("project");
    const mine = report.units[0].file_rows.filter(
      (row) => row.assignee === this.session.user.user_id &&
        (row.state === "assigned" || row.state === "in_progress"),
    );
    const notices = (await this.api.notices()).notices;
    this.renderShell(mine, notices.map((n) => n.body));
    if (this.file) {
      await this.openFile(this.file.file_id);
    }
  }

  private renderShell(mine: FileRow[], notices: string[]): void {
    this.root.innerHTML = "";
    const shell = document.createElement("div");
    shell.className = "workbench";

    const header = document.createElement("div");
    header.className = "workbench-header";
    header.textContent =
      `${this.session.user.display_name} — ${this.language} annotator`;
    shell.appendChild(header);

    if (notices.length) {
      const board = document.createElement("ul");
      board.className = "notices";
      for (const body of notices) {
        const item = document.createElement("li");
        item.textContent = body;
        board.appendChild(item);
      }
      shell.appendChild(board);
    }

    const list = document.createElement("ul");
    list.className = "file-list";
    for (const row of mine.slice(0, this.session.project.max_active_assignments)) {
      const item = document.createElement("li");
      const open = document.createElement("button");
      open.type = "button";
      open.className = "open-file";
      open.setAttribute("data-file", row.file_id);
      open.textContent =
        `${row.file_id} (${row.domain}) ${row.complete_sentences}/${row.sentences}`;
      open.addEventListener("click", () => void this.openFile(row.file_id));
      item.appendChild(open);
      list.appendChild(item);
    }
    shell.appendChild(list);

    const pane = document.createElement("div");
    pane.className = "file-pane";
    pane.setAttribute("data-role", "file-pane");
    shell.appendChild(pane);
    this.root.appendChild(shell);
  }

  async openFile(fileId: string): Promise<void> {
    this.file = await this.api.getFile(fileId);
    this.renderSentences();
  }

  private pane(): HTMLElement {
    return this.root.querySelector('[data-role="file-pane"]') as HTMLElement;
  }

  /** A file whose active assignment belongs to someone else is view-only. */
  get readOnly(): boolean {
    const assignment = this.file?.assignment ?? null;
    return !assignment || assignment.assignee !== this.session.user.user_id;
  }

  renderSentences(): void {
    const file = this.file;
    if (!file) return;
    const pane = this.pane();
    pane.innerHTML = "";

    if (this.readOnly) {
      const banner = document.createElement("div");
      banner.className = "read-only-banner";
      banner.setAttribute("data-role", "read-only-banner");
      banner.textContent = file.assignment
        ? `read-only: this file is assigned to ${file.assignment.assignee}`
        : "read-only: this file is not assigned to you";
      pane.appendChild(banner);
    }

    const bar = document.createElement("div");
    bar.className = "completion";
    bar.setAttribute("data-role", "completion");
    bar.textContent =
      `${file.completion.complete}/${file.completion.total} sentences complete`;
    bar.style.setProperty("--fraction", String(file.completion.fraction));
    pane.appendChild(bar);

    const actions = document.createElement("div");
    actions.className = "file-actions";
    if (!this.readOnly) {
      const autoTag = document.createElement("button");
      autoTag.type = "button";
      autoTag.className = "auto-tag";
      autoTag.textContent = "auto-tag closed classes";
      autoTag.addEventListener("click", () => void this.runAutoTag());
      actions.appendChild(autoTag);
    }
    pane.appendChild(actions);

    const errorBox = document.createElement("div");
    errorBox.className = "error-box";
    errorBox.setAttribute("data-role", "error");
    pane.appendChild(errorBox);

    for (const sentence of file.sentences) {
      pane.appendChild(this.renderSentence(sentence.id));
    }
    if (!this.readOnly) {
      pane.appendChild(this.renderLexiconForm());
    }
    void this.renderGlossPane(pane);
  }

  private renderSentence(sid: string): HTMLElement {
    const file = this.file!;
    const sentence = file.sentences.find((s) => s.id === sid)!;
    const box = document.createElement("div");
    box.className = "sentence";
    box.setAttribute("data-sid", sid);
    box.tabIndex = 0;

    const tokens = document.createElement("div");
    tokens.className = "tokens";
    sentence.tokens.forEach((surface, index) => {
      const chip = document.createElement("span");
      chip.className = "token";
      chip.setAttribute("data-index", String(index));
      const tag = sentence.tags[index];
      const word = document.createElement("span");
      word.className = "surface";
      word.textContent = surface;
      chip.appendChild(word);
      if (tag !== null) {
        const badge = document.createElement("span");
        badge.className = "tag-badge";
        badge.textContent = tag;
        chip.appendChild(badge);
      } else if (!this.readOnly && this.lexicon[surface]) {
        // lexicon suggestion: shown, never auto-applied over user work
        const hint = document.createElement("button");
        hint.type = "button";
        hint.className = "suggestion";
        hint.setAttribute("data-tag", this.lexicon[surface]);
        hint.textContent = `${this.lexicon[surface]}?`;
        hint.addEventListener("click", (event) => {
          event.stopPropagation();
          void this.applyTag(sid, index, this.lexicon[surface]);
        });
        chip.appendChild(hint);
      }
      if (this.selected && this.selected.sid === sid && this.selected.index === index) {
        chip.classList.add("selected");
      }
      if (!this.readOnly) {
        chip.addEventListener("click", () => {
          this.selected = { sid, index };
          this.renderSentences();
        });
      }
      tokens.appendChild(chip);
    });
    box.appendChild(tokens);

    if (!this.readOnly && this.selected && this.selected.sid === sid) {
      const index = this.selected.index;
      box.appendChild(renderTagPalette({
        labels: this.session.project.tagset.labels,
        onPick: (tag) => void this.applyTag(sid, index, tag),
      }));
    }
    box.addEventListener("keydown", (event) => {
      if (!this.selected || this.selected.sid !== sid) return;
      const tag = tagForKey(event.key, this.session.project.tagset.labels);
      if (tag) void this.applyTag(sid, this.selected.index, tag);
    });

    if (!this.readOnly) {
      const editToggle = document.createElement("button");
      editToggle.type = "button";
      editToggle.className = "edit-toggle";
      editToggle.textContent = "edit";
      editToggle.addEventListener("click", () => this.renderEditBox(box, sid));
      box.appendChild(editToggle);
    }
    return box;
  }

  private renderEditBox(box: HTMLElement, sid: string): void {
    const sentence = this.file!.sentences.find((s) => s.id === sid)!;
    const editor = document.createElement("div");
    editor.className = "edit-box";
    const input = document.createElement("textarea");
    input.className = "edit-text";
    input.value = sentence.tokens.join(" ");
    const save = document.createElement("button");
    save.type = "button";
    save.className = "edit-save";
    save.textContent = "save";
    save.addEventListener("click", () => void this.saveEdit(sid, input.value));
    editor.appendChild(input);
    editor.appendChild(save);
    box.appendChild(editor);
  }

  private renderLexiconForm(): HTMLElement {
    const form = document.createElement("div");
    form.className = "lexicon-form";
    const surface = document.createElement("input");
    surface.type = "text";
    surface.className = "lexicon-surface";
    surface.placeholder = "closed-class word";
    const tagSelect = document.createElement("select");
    tagSelect.className = "lexicon-tag";
    for (const label of this.session.project.tagset.labels) {
      const option = document.createElement("option");
      option.value = label;
      option.textContent = label;
      tagSelect.appendChild(option);
    }
    const add = document.createElement("button");
    add.type = "button";
    add.className = "lexicon-add";
    add.textContent = "share lexicon entry";
    add.addEventListener("click", () =>
      void this.addLexiconEntry(surface.value.trim(), tagSelect.value));
    form.appendChild(surface);
    form.appendChild(tagSelect);
    form.appendChild(add);
    return form;
  }

  private async renderGlossPane(pane: HTMLElement): Promise<void> {
    const file = this.file;
    if (!file) return;
    for (const target of this.session.project.languages) {
      if (target === file.language) continue;
      try {
        const translation = await this.api.translate(file.file_id, `${file.language}-${target}`);
        const gloss = document.createElement("div");
        gloss.className = "gloss-pane";
        gloss.setAttribute("data-pair", translation.pair);
        for (const line of translation.sentences) {
          const row = document.createElement("div");
          row.className = "gloss-row";
          row.textContent = line.gloss
            .map((g) => (g.translated ? g.output : `[${g.output}]`))
            .join(" ");
          gloss.appendChild(row);
        }
        pane.appendChild(gloss);
        return;
      } catch {
        /* no dictionary for this pair */
      }
    }
  }

  private showError(message: string): void {
    const box = this.root.querySelector('[data-role="error"]');
    if (box) box.textContent = message;
  }

  async applyTag(sid: string, index: number, tag: string): Promise<void> {
    const file = this.file;
    if (!file) return;
    const sentence = file.sentences.find((s) => s.id === sid)!;
    const previous = sentence.tags[index];
    sentence.tags[index] = tag; // optimistic
    this.renderSentences();
    try {
      const updated = await this.api.tagToken(file.file_id, sid, index, tag);
      sentence.tags = updated.tags;
      this.file = await this.api.getFile(file.file_id); // completion moved
      this.renderSentences();
    } catch (error) {
      sentence.tags[index] = previous; // roll back
      this.file = await this.api.getFile(file.file_id);
      this.renderSentences();
      this.showError(error instanceof ApiError ? error.message : String(error));
    }
  }

  async saveEdit(sid: string, text: string): Promise<void> {
    const file = this.file;
    if (!file) return;
    try {
      await this.api.editSentence(file.file_id, sid, text);
      this.file = await this.api.getFile(file.file_id);
      this.selected = null;
      this.renderSentences();
    } catch (error) {
      this.showError(error instanceof ApiError ? error.message : String(error));
    }
  }

  async runAutoTag(): Promise<void> {
    const file = this.file;
    if (!file) return;
    try {
      const result = await this.api.autoTag(file.file_id);
      this.file = await this.api.getFile(file.file_id);
      this.renderSentences();
      for (const hit of result.applied) {
        const chip = this.root.querySelector(
          `[data-sid="${hit.sid}"] [data-index="${hit.index}"]`,
        );
        chip?.classList.add("just-auto-tagged");
      }
    } catch (error) {
      this.showError(error instanceof ApiError ? error.message : String(error));
    }
  }

  async addLexiconEntry(surface: string, tag: string): Promise<void> {
    if (!surface) return;
    try {
      const result = await this.api.updateLexicon(this.language, surface, tag);
      this.lexicon[surface] = tag;
      this.lexiconVersion = result.version;
      this.renderSentences();
    } catch (error) {
      this.showError(error instanceof ApiError ? error.message : String(error));
    }
  }
}

/** The admin dashboard: assignment board with inline workflow errors,
 * per-file completion bars, completion-gated download buttons, progress,
 * and (master admin only) user management, uploads, notices and time logs.
 *
 * Panels the role may not use are not rendered; the server still enforces
 * every rule, and rejections surface inline.
 */

import { ApiClient, ApiError } from "./api";
import { Poller } from "./polling";
import type { FileRow, Session, User } from "./types";

export class AdminDashboard {
  rows: FileRow[] = [];
  annotators: User[] = [];
  private poller: Poller;

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private session: Session,
    pollIntervalMs?: number,
  ) {
    this.poller = new Poller(() => this.refresh(), pollIntervalMs);
  }

  private get isMaster(): boolean {
    return this.session.user.role.kind === "master_admin";
  }

  private get language(): string | null {
    return this.session.user.role.language;
  }

  async start(): Promise<void> {
    await this.refresh();
    this.poller.start();
  }

  stop(): void {
    this.poller.stop();
  }

  async refresh(): Promise<void> {
    const report = await this.api.progress("project");
    const rows = report.units[0].file_rows;
    this.rows = this.isMaster
      ? rows
      : rows.filter((row) => row.language === this.language);
    const users = (await this.api.listUsers()).users;
    this.annotators = users.filter((u) => u.role.kind === "annotator" && u.active);
    this.render(report.units[0].sentences);
  }

  private render(sentences: { total: number; complete: number }): void {
    this.root.innerHTML = "";
    const shell = document.createElement("div");
    shell.className = "dashboard";

    const header = document.createElement("div");
    header.className = "dashboard-header";
    header.textContent = `${this.session.user.display_name} — ` +
      (this.isMaster ? "master admin" : `${this.language} admin`);
    shell.appendChild(header);

    const summary = document.createElement("div");
    summary.className = "progress-summary";
    summary.textContent =
      `project sentences: ${sentences.complete}/${sentences.total} complete`;
    shell.appendChild(summary);

    const board = document.createElement("table");
    board.className = "assignment-board";
    for (const row of this.rows) {
      board.appendChild(this.renderRow(row));
    }
    shell.appendChild(board);

    if (this.isMaster) {
      shell.appendChild(this.renderUserPanel());
      shell.appendChild(this.renderUploadPanel());
      shell.appendChild(this.renderNoticePanel());
      const timeLog = document.createElement("div");
      timeLog.className = "time-log";
      timeLog.setAttribute("data-role", "time-log");
      shell.appendChild(timeLog);
      void this.renderTimeLog(timeLog);
    }
    this.root.appendChild(shell);
  }

  private renderRow(row: FileRow): HTMLElement {
    const tr = document.createElement("tr");
    tr.className = "board-row";
    tr.setAttribute("data-file", row.file_id);

    const name = document.createElement("td");
    name.textContent = `${row.file_id} (${row.language}/${row.domain})`;
    tr.appendChild(name);

    const completion = document.createElement("td");
    const bar = document.createElement("div");
    bar.className = "completion-bar";
    const fill = document.createElement("div");
    fill.className = "completion-fill";
    fill.style.width = `${Math.round(row.fraction * 100)}%`;
    bar.appendChild(fill);
    const label = document.createElement("span");
    label.className = "completion-label";
    label.textContent = `${row.complete_sentences}/${row.sentences}`;
    completion.appendChild(bar);
    completion.appendChild(label);
    tr.appendChild(completion);

    const assignCell = document.createElement("td");
    const select = document.createElement("select");
    select.className = "assignee-pick";
    for (const user of this.annotators.filter((u) => u.role.language === row.language)) {
      const option = document.createElement("option");
      option.value = user.user_id;
      option.textContent = user.user_id;
      select.appendChild(option);
    }
    const action = document.createElement("button");
    action.type = "button";
    action.className = "assign-action";
    action.textContent = row.assignee ? `reassign (now ${row.assignee})` : "assign";
    action.addEventListener("click", () =>
      void this.assignOrReassign(row, select.value, tr));
    assignCell.appendChild(select);
    assignCell.appendChild(action);
    tr.appendChild(assignCell);

    const downloadCell = document.createElement("td");
    const download = document.createElement("button");
    download.type = "button";
    download.className = "download-button";
    download.setAttribute("data-file", row.file_id);
    download.textContent = "download";
    // mirrors the server-side gate: enabled exactly at 100% completion
    download.disabled = row.fraction < 1.0;
    download.addEventListener("click", () => void this.download(row.file_id, tr));
    downloadCell.appendChild(download);
    tr.appendChild(downloadCell);

    const errorCell = document.createElement("td");
    errorCell.className = "row-error";
    errorCell.setAttribute("data-role", "row-error");
    tr.appendChild(errorCell);
    return tr;
  }

  private inlineError(tr: HTMLElement, message: string): void {
    const cell = tr.querySelector('[data-role="row-error"]');
    if (cell) cell.textContent = message;
  }

  async assignOrReassign(row: FileRow, assignee: string, tr: HTMLElement): Promise<void> {
    if (!assignee) {
      this.inlineError(tr, "no annotator available for this language");
      return;
    }
    try {
      if (row.assignee) {
        const file = await this.api.getFile(row.file_id);
        if (file.assignment) {
          await this.api.reassign(file.assignment.assignment_id, assignee);
        }
      } else {
        await this.api.assign(row.file_id, assignee);
      }
      await this.refresh();
    } catch (error) {
      // e.g. CapExceeded when the annotator already holds the maximum
      this.inlineError(tr, error instanceof ApiError ? error.message : String(error));
    }
  }

  async download(fileId: string, tr: HTMLElement): Promise<void> {
    try {
      const text = await this.api.download(fileId);
      const cell = tr.querySelector('[data-role="row-error"]');
      if (cell) cell.textContent = `downloaded ${text.length} chars`;
    } catch (error) {
      this.inlineError(tr, error instanceof ApiError ? error.message : String(error));
    }
  }

  private renderUserPanel(): HTMLElement {
    const panel = document.createElement("div");
    panel.className = "user-panel";
    panel.setAttribute("data-role", "user-panel");
    const title = document.createElement("h3");
    title.textContent = "users";
    panel.appendChild(title);

    const id = document.createElement("input");
    id.type = "text";
    id.className = "new-user-id";
    id.placeholder = "user id";
    const kind = document.createElement("select");
    kind.className = "new-user-kind";
    for (const value of ["annotator", "admin", "master_admin"]) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value;
      kind.appendChild(option);
    }
    const language = document.createElement("select");
    language.className = "new-user-language";
    for (const lang of this.session.project.languages) {
      const option = document.createElement("option");
      option.value = lang;
      option.textContent = lang;
      language.appendChild(option);
    }
    const credential = document.createElement("input");
    credential.type = "password";
    credential.className = "new-user-credential";
    credential.placeholder = "credential";
    const create = document.createElement("button");
    create.type = "button";
    create.className = "create-user";
    create.textContent = "create user";
    create.addEventListener("click", () => {
      const lang = kind.value === "master_admin" ? null : language.value;
      void this.api
        .createUser(id.value.trim(), id.value.trim(), kind.value, lang, credential.value)
        .then(() => this.refresh())
        .catch((error) => {
          const status = panel.querySelector('[data-role="panel-error"]');
          if (status) status.textContent = error instanceof ApiError ? error.message : String(error);
        });
    });
    const errorBox = document.createElement("div");
    errorBox.setAttribute("data-role", "panel-error");
    panel.appendChild(id);
    panel.appendChild(kind);
    panel.appendChild(language);
    panel.appendChild(credential);
    panel.appendChild(create);
    panel.appendChild(errorBox);
    return panel;
  }

  private renderUploadPanel(): HTMLElement {
    const panel = document.createElement("div");
    panel.className = "upload-panel";
    panel.setAttribute("data-role", "upload-panel");
    const text = document.createElement("textarea");
    text.className = "upload-text";
    text.placeholder = "#LANG hin\n#DOMAIN health\nhealth-000001\t...";
    const submit = document.createElement("button");
    submit.type = "button";
    submit.className = "upload-submit";
    submit.textContent = "upload raw file";
    submit.addEventListener("click", () =>
      void this.api.uploadRaw(text.value).then(() => this.refresh()).catch(() => undefined));
    panel.appendChild(text);
    panel.appendChild(submit);
    return panel;
  }

  private renderNoticePanel(): HTMLElement {
    const panel = document.createElement("div");
    panel.className = "notice-panel";
    panel.setAttribute("data-role", "notice-panel");
    const audience = document.createElement("select");
    audience.className = "notice-audience";
    for (const value of ["all", ...this.session.project.languages]) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value;
      audience.appendChild(option);
    }
    const body = document.createElement("input");
    body.type = "text";
    body.className = "notice-body";
    body.placeholder = "notice text";
    const post = document.createElement("button");
    post.type = "button";
    post.className = "notice-post";
    post.textContent = "post notice";
    post.addEventListener("click", () =>
      void this.api.postNotice(audience.value, body.value).catch(() => undefined));
    panel.appendChild(audience);
    panel.appendChild(body);
    panel.appendChild(post);
    return panel;
  }

  private async renderTimeLog(container: HTMLElement): Promise<void> {
    try {
      const report = await this.api.userProgress();
      const table = document.createElement("table");
      for (const unit of report.units) {
        for (const session of unit.sessions) {
          const tr = document.createElement("tr");
          const who = document.createElement("td");
          who.textContent = unit.key;
          const login = document.createElement("td");
          login.textContent = session.login_at;
          const logout = document.createElement("td");
          logout.textContent = session.logout_at ?? "(active)";
          tr.appendChild(who);
          tr.appendChild(login);
          tr.appendChild(logout);
          table.appendChild(tr);
        }
      }
      container.appendChild(table);
    } catch {
      /* non-master admins never reach here; defensive anyway */
    }
  }
}

/** Thin typed client over the service HTTP API.
 *
 * Accepts an injectable fetch-like function so tests can run against a
 * scripted server double without touching the network.
 */

import type {
  ApiErrorEnvelope,
  AssignmentView,
  AutoTagResult,
  FileView,
  LexiconSync,
  NoticeView,
  ProgressReport,
  SentenceView,
  Session,
  TranslationView,
  User,
} from "./types";

export interface FetchResponseLike {
  status: number;
  json(): Promise<unknown>;
  text(): Promise<string>;
}

export type FetchLike = (
  url: string,
  init: { method: string; headers: Record<string, string>; body?: string },
) => Promise<FetchResponseLike>;

export class ApiError extends Error {
  constructor(public envelope: ApiErrorEnvelope, public status: number) {
    super(`${envelope.code}: ${envelope.message}`);
  }
}

export class ApiClient {
  token: string | null = null;

  constructor(private baseUrl: string, private fetchFn: FetchLike) {}

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    return headers;
  }

  private async unwrap<T>(response: FetchResponseLike): Promise<T> {
    if (response.status >= 400) {
      let envelope: ApiErrorEnvelope = {
        code: "HttpError",
        message: `status ${response.status}`,
        entity: null,
        details: {},
      };
      try {
        const payload = (await response.json()) as { error?: ApiErrorEnvelope };
        if (payload.error) envelope = payload.error;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(envelope, response.status);
    }
    return (await response.json()) as T;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: { method: string; headers: Record<string, string>; body?: string } = {
      method,
      headers: this.headers(),
    };
    if (body !== undefined) init.body = JSON.stringify(body);
    return this.unwrap<T>(await this.fetchFn(this.baseUrl + path, init));
  }

  async login(userId: string, credential: string): Promise<Session> {
    const session = await this.request<Session>("POST", "/api/login", {
      user_id: userId,
      credential,
    });
    this.token = session.token;
    return session;
  }

  async logout(): Promise<void> {
    await this.request("POST", "/api/logout");
    this.token = null;
  }

  getFile(fileId: string): Promise<FileView> {
    return this.request("GET", `/api/files/${fileId}`);
  }

  /** Returns the annotated file text; the server enforces the completion gate. */
  async download(fileId: string): Promise<string> {
    const response = await this.fetchFn(`${this.baseUrl}/api/files/${fileId}/download`, {
      method: "GET",
      headers: this.headers(),
    });
    if (response.status >= 400) {
      const payload = (await response.json()) as { error: ApiErrorEnvelope };
      throw new ApiError(payload.error, response.status);
    }
    return response.text();
  }

  tagToken(fileId: string, sid: string, index: number, tag: string): Promise<SentenceView> {
    return this.request("PUT", `/api/files/${fileId}/sentences/${sid}/tokens/${index}/tag`, { tag });
  }

  editSentence(fileId: string, sid: string, text: string): Promise<{ sentence: SentenceView }> {
    return this.request("POST", `/api/files/${fileId}/sentences/${sid}/edit`, { text });
  }

  autoTag(fileId: string): Promise<AutoTagResult> {
    return this.request("POST", `/api/files/${fileId}/auto-tag`);
  }

  lexicon(language: string, since?: number): Promise<LexiconSync> {
    const query = since === undefined ? "" : `?since=${since}`;
    return this.request("GET", `/api/lexicon/${language}${query}`);
  }

  updateLexicon(language: string, surface: string, tag: string): Promise<{ version: number }> {
    return this.request("PUT", `/api/lexicon/${language}`, { surface, tag });
  }

  progress(scope: string): Promise<ProgressReport> {
    return this.request("GET", `/api/progress?scope=${scope}`);
  }

  notices(): Promise<{ notices: NoticeView[] }> {
    return this.request("GET", "/api/notices");
  }

  postNotice(audience: string, body: string): Promise<{ notice_id: string }> {
    return this.request("POST", "/api/notices", { audience, body });
  }

  assign(fileId: string, assignee: string): Promise<AssignmentView> {
    return this.request("POST", "/api/assignments", { file_id: fileId, assignee });
  }

  reassign(assignmentId: string, assignee: string): Promise<{ old: AssignmentView; new: AssignmentView }> {
    return this.request("POST", `/api/assignments/${assignmentId}/reassign`, { assignee });
  }

  complete(assignmentId: string): Promise<AssignmentView> {
    return this.request("POST", `/api/assignments/${assignmentId}/complete`);
  }

  listUsers(): Promise<{ users: User[] }> {
    return this.request("GET", "/api/users");
  }

  createUser(userId: string, displayName: string, kind: string, language: string | null, credential: string): Promise<User> {
    return this.request("POST", "/api/users", {
      user_id: userId,
      display_name: displayName,
      role: { kind, language },
      credential,
    });
  }

  deactivateUser(userId: string): Promise<User> {
    return this.request("DELETE", `/api/users/${userId}`);
  }

  uploadRaw(rawText: string): Promise<{ file_id: string }> {
    const init = {
      method: "POST",
      headers: { ...this.headers(), "Content-Type": "text/plain; charset=utf-8" },
      body: rawText,
    };
    return this.fetchFn(`${this.baseUrl}/api/files`, init).then((r) => this.unwrap(r));
  }

  translate(fileId: string, pair: string): Promise<TranslationView> {
    return this.request("GET", `/api/translate/${fileId}?pair=${pair}`);
  }

  userProgress(): Promise<{ scope: string; units: import("./types").UserProgressUnit[] }> {
    return this.request("GET", "/api/progress?scope=user");
  }
}

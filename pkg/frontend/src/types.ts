/** Payload shapes of the annotation service API. */

export type RoleKind = "master_admin" | "admin" | "annotator";

export interface Role {
  kind: RoleKind;
  language: string | null;
}

export interface User {
  user_id: string;
  display_name: string;
  role: Role;
  active: boolean;
}

export interface TagsetInfo {
  name: string;
  labels: string[];
}

export interface ProjectInfo {
  languages: string[];
  tagset: TagsetInfo;
  max_active_assignments: number;
  open_registration: boolean;
}

export interface Session {
  token: string;
  user: User;
  project: ProjectInfo;
}

export interface SentenceView {
  id: string;
  tokens: string[];
  tags: (string | null)[];
}

export interface Completion {
  complete: number;
  total: number;
  fraction: number;
}

export interface AssignmentView {
  assignment_id: string;
  file_id: string;
  assignee: string;
  state: string;
}

export interface FileView {
  file_id: string;
  language: string;
  domain: string;
  completion: Completion;
  assignment: AssignmentView | null;
  sentences: SentenceView[];
}

export interface FileRow {
  file_id: string;
  language: string;
  domain: string;
  sentences: number;
  complete_sentences: number;
  fraction: number;
  assignee: string | null;
  state: string | null;
}

export interface ProgressUnit {
  key: string;
  files: { total: number; assigned: number; completed: number };
  sentences: { total: number; complete: number };
  completed_by_annotator: Record<string, number>;
  file_rows: FileRow[];
}

export interface ProgressReport {
  scope: string;
  units: ProgressUnit[];
}

export interface UserProgressUnit {
  key: string;
  display_name: string;
  role: Role;
  active: boolean;
  active_assignments: AssignmentView[];
  completed_count: number;
  sessions: { login_at: string; logout_at: string | null }[];
}

export interface LexiconDelta {
  surface: string;
  tag: string | null;
  version: number;
}

export interface LexiconSync {
  language: string;
  version: number;
  entries?: Record<string, string>;
  delta?: LexiconDelta[];
}

export interface NoticeView {
  notice_id: string;
  author: string;
  audience: string;
  body: string;
  posted_at: string;
}

export interface GlossToken {
  source: string;
  output: string;
  translated: boolean;
}

export interface TranslationView {
  file_id: string;
  pair: string;
  sentences: { id: string; gloss: GlossToken[] }[];
}

export interface AutoTagResult {
  count: number;
  applied: { sid: string; index: number; tag: string }[];
}

export interface ApiErrorEnvelope {
  code: string;
  message: string;
  entity: string | null;
  details: Record<string, unknown>;
}

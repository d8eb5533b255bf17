// Thin client over the JSON API. One method per route the UI needs;
// no response reshaping beyond JSON parsing.

import {
  Area,
  BallotContent,
  Comment,
  Decision,
  Group,
  Revision,
  SortKey,
  Tally,
  TaskList,
  ThreadIndex,
} from './types';

type Fetch = typeof fetch;

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string) {
    super(message);
  }
}

export class ApiClient {
  private token: string | null = null;

  constructor(private base = '', private fetchFn: Fetch = fetch) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {};
    if (body !== undefined) headers['Content-Type'] = 'application/json';
    if (this.token) headers['Authorization'] = `Bearer ${this.token}`;
    const resp = await this.fetchFn(this.base + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const data = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, data.error ?? 'Error', data.detail ?? '');
    }
    return data as T;
  }

  async login(email: string, password: string): Promise<void> {
    const r = await this.request<{ token: string }>('POST', '/auth/login', {
      email,
      password,
    });
    this.token = r.token;
  }

  async logout(): Promise<void> {
    await this.request('POST', '/auth/logout');
    this.token = null;
  }

  getGroup(id: number): Promise<Group> {
    return this.request('GET', `/groups/${id}`);
  }

  getArea(id: number): Promise<Area> {
    return this.request('GET', `/areas/${id}`);
  }

  getIndex(areaId: number, sort: SortKey, limit = 100, offset = 0): Promise<ThreadIndex> {
    return this.request('GET',
      `/areas/${areaId}/index?sort=${sort}&limit=${limit}&offset=${offset}`);
  }

  postComment(
    areaId: number,
    body: string,
    opts: { subject?: string; target?: { kind: string; ref: number } } = {},
  ): Promise<Comment> {
    return this.request('POST', `/areas/${areaId}/comments`, {
      body,
      ...opts,
    });
  }

  getRevision(docId: number, revId: number): Promise<Revision> {
    return this.request('GET',
      `/documents/${docId}/revisions/${revId}?markers=true`);
  }

  placeAnchor(revId: number, offset: number, body: string, subject?: string) {
    return this.request('POST', `/revisions/${revId}/anchors`,
      { offset, body, subject });
  }

  reviseDocument(docId: number, baseRev: number, body: string): Promise<Revision> {
    return this.request('POST', `/documents/${docId}/revisions`,
      { base_rev: baseRev, body });
  }

  getDecision(id: number): Promise<Decision> {
    return this.request('GET', `/decisions/${id}`);
  }

  getTally(decisionId: number): Promise<Tally> {
    return this.request('GET', `/decisions/${decisionId}/tally`);
  }

  castBallot(decisionId: number, content: BallotContent, annotation?: string) {
    return this.request('PUT', `/decisions/${decisionId}/ballot`,
      { content, annotation });
  }

  closeDecision(id: number): Promise<Tally> {
    return this.request('POST', `/decisions/${id}/close`);
  }

  getTasks(projectId: number, sort = 'priority'): Promise<TaskList> {
    return this.request('GET', `/projects/${projectId}/tasks?sort=${sort}`);
  }

  volunteer(taskId: number) {
    return this.request('POST', `/tasks/${taskId}/volunteer`);
  }

  subscribe(areaId: number, on: boolean) {
    return this.request(on ? 'PUT' : 'DELETE', `/areas/${areaId}/subscription`);
  }
}

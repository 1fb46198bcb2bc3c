/** Thin typed client over the annotation HTTP API. */

import type { ApiError, LemmaInfo, ViewResponse } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, body: ApiError) {
    super(body.message);
    this.status = status;
    this.code = body.code;
  }
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.base}${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let payload: ApiError;
      try {
        payload = (await response.json()) as ApiError;
      } catch {
        payload = { code: "http_error", message: `HTTP ${response.status}` };
      }
      throw new ApiRequestError(response.status, payload);
    }
    return (await response.json()) as T;
  }

  listProjects(): Promise<{ projects: { id: string; lang: string; n_lemmas: number }[] }> {
    return this.request("GET", "/api/projects");
  }

  listLemmas(project: string): Promise<{ lemmas: LemmaInfo[] }> {
    return this.request("GET", `/api/projects/${encodeURIComponent(project)}/lemmas`);
  }

  getView(project: string, lemma: string): Promise<ViewResponse> {
    return this.request(
      "GET",
      `/api/projects/${encodeURIComponent(project)}/lemmas/${encodeURIComponent(lemma)}/view`,
    );
  }

  recompute(
    project: string,
    lemma: string,
    options: { k?: number; method?: string; seed?: number; cluster?: string },
  ): Promise<unknown> {
    return this.request(
      "POST",
      `/api/projects/${encodeURIComponent(project)}/lemmas/${encodeURIComponent(lemma)}/recompute`,
      options,
    );
  }

  addSense(project: string, lemma: string, senseId: string, gloss: string): Promise<{ revision: number }> {
    return this.request(
      "POST",
      `/api/projects/${encodeURIComponent(project)}/lemmas/${encodeURIComponent(lemma)}/senses`,
      { sense_id: senseId, gloss },
    );
  }

  assign(
    project: string,
    sentenceId: string,
    lemma: string,
    senseId: string,
    annotator: string,
  ): Promise<{ revision: number }> {
    return this.request("POST", `/api/projects/${encodeURIComponent(project)}/annotations`, {
      sentence_id: sentenceId,
      lemma,
      sense_id: senseId,
      annotator,
      provenance: "manual",
    });
  }

  unassign(
    project: string,
    sentenceId: string,
    lemma: string,
    annotator: string,
  ): Promise<{ status: string; revision: number }> {
    const path =
      `/api/projects/${encodeURIComponent(project)}/annotations/` +
      `${encodeURIComponent(sentenceId)}/${encodeURIComponent(lemma)}/${encodeURIComponent(annotator)}`;
    return this.request("DELETE", path);
  }
}

/** Payload shapes of the annotation HTTP API. */

export interface SenseDef {
  sense_id: string;
  gloss: string;
  gloss_en?: string | null;
}

export interface SentenceInfo {
  text: string;
  target_span: [number, number];
  surface_form: string;
}

/** Response of GET /api/projects/{p}/lemmas/{l}/view; arrays aligned by index. */
export interface ViewResponse {
  lemma: string;
  method: string;
  ids: string[];
  points: [number, number][];
  clusters: number[] | null;
  senses: (string | null)[];
  sentences: (SentenceInfo | null)[];
  sense_inventory: SenseDef[];
  counts: Record<string, number>;
  revision: number;
}

export interface LemmaInfo {
  lemma: string;
  forms: string[];
  n_sentences: number;
  senses: SenseDef[];
  has_projection: boolean;
}

export interface ApiError {
  code: string;
  message: string;
  detail?: string;
}

/** One glyph of the scatter: a sentence with its current local state. */
export interface PointState {
  id: string;
  x: number;
  y: number;
  cluster: number;
  sense: string | null;
  sentence: SentenceInfo | null;
}

export interface Rect {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
}

// Wire types mirroring the service's JSON bodies.

export interface DirectiveView {
  id: string;
  entry_point: string;
  text: string;
  context_sources: string[];
  version: number;
}

export interface FailureView {
  category: string;
  detail: string;
  stage: string;
}

export interface BlockView {
  directive_id: string;
  directive_version: number;
  cache_key: string;
  raw_response: string;
  source: string;
  source_hash: string;
  status: 'ready' | 'failed';
  failure: FailureView | null;
  created_at: string;
}

export interface OutcomeView {
  status: 'ok' | 'timeout' | 'runtime_error';
  value: unknown;
  error_message: string;
  elapsed_ms: number;
}

export interface EditorEffects {
  text: string;
  warnings: { title: string; message: string }[];
}

export interface InvokeResponse {
  outcome: OutcomeView | null;
  block: BlockView;
  effects: EditorEffects;
}

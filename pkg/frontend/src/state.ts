import type { BlockView, DirectiveView, InvokeResponse, OutcomeView } from './types';

// The demo document lives purely client-side; invoke responses report the
// effects generated code had on the service's editor model and the UI
// renders them, never executing generated code itself.

export interface UiState {
  directives: DirectiveView[];
  selectedId: string | null;
  documentText: string;
  warnings: { title: string; message: string }[];
  lastBlock: BlockView | null;
  previousSource: string | null; // diff baseline: prior block for this directive
  lastOutcome: OutcomeView | null;
  staleBlock: boolean; // directive edited after the block was generated
  blocks: BlockView[];
  banner: string | null;
}

export function initialState(): UiState {
  return {
    directives: [],
    selectedId: null,
    documentText: '',
    warnings: [],
    lastBlock: null,
    previousSource: null,
    lastOutcome: null,
    staleBlock: false,
    blocks: [],
    banner: null,
  };
}

export function withDirectives(state: UiState, directives: DirectiveView[]): UiState {
  const selectedId = state.selectedId ?? directives[0]?.id ?? null;
  return { ...state, directives, selectedId };
}

export function selectDirective(state: UiState, id: string): UiState {
  if (!state.directives.some((d) => d.id === id)) return state;
  return {
    ...state,
    selectedId: id,
    lastBlock: null,
    previousSource: null,
    lastOutcome: null,
    staleBlock: false,
    blocks: [],
    banner: null,
  };
}

export function selectedDirective(state: UiState): DirectiveView | null {
  return state.directives.find((d) => d.id === state.selectedId) ?? null;
}

export function applyEdit(state: UiState, updated: DirectiveView): UiState {
  return {
    ...state,
    directives: state.directives.map((d) => (d.id === updated.id ? updated : d)),
    // a block generated before this edit no longer reflects the directive
    staleBlock: state.selectedId === updated.id && state.lastBlock !== null,
  };
}

export function applyInvoke(state: UiState, response: InvokeResponse): UiState {
  const failed = response.block.status === 'failed';
  return {
    ...state,
    documentText: response.effects?.text ?? state.documentText,
    warnings: response.effects?.warnings ?? [],
    previousSource: state.lastBlock?.source ?? null,
    lastBlock: response.block,
    lastOutcome: response.outcome,
    staleBlock: false,
    banner: failed && response.block.failure
      ? `${response.block.failure.category}: ${response.block.failure.detail}`
      : response.outcome && response.outcome.status !== 'ok'
        ? `${response.outcome.status}: ${response.outcome.error_message}`
        : null,
  };
}

export function applyRegenerate(state: UiState, block: BlockView): UiState {
  return {
    ...state,
    previousSource: state.lastBlock?.source ?? null,
    lastBlock: block,
    lastOutcome: null,
    staleBlock: false,
    banner: block.failure ? `${block.failure.category}: ${block.failure.detail}` : null,
  };
}

export function applyBlocks(state: UiState, blocks: BlockView[]): UiState {
  const newestFirst = [...blocks].sort((x, y) => y.created_at.localeCompare(x.created_at));
  return { ...state, blocks: newestFirst };
}

export function validateEdit(text: string): string | null {
  if (text.trim() === '') return 'Directive text must not be empty.';
  return null;
}

// Per-directive serialization: at most one in-flight mutation per directive,
// later ones run in submission order after the current reply lands.
export class MutationQueue {
  private tails = new Map<string, Promise<void>>();

  enqueue<T>(directiveId: string, operation: () => Promise<T>): Promise<T> {
    const tail = this.tails.get(directiveId) ?? Promise.resolve();
    const run = tail.then(operation);
    this.tails.set(
      directiveId,
      run.then(
        () => undefined,
        () => undefined,
      ),
    );
    return run;
  }
}

import { ApiClient } from './api';
import {
  applyBlocks,
  applyEdit,
  applyInvoke,
  initialState,
  MutationQueue,
  selectDirective,
  UiState,
  validateEdit,
  withDirectives,
} from './state';
import {
  renderBlockHistory,
  renderDiffPane,
  renderDirectiveEditor,
  renderDirectiveList,
  renderDocument,
  renderOutcome,
  renderSourcePane,
} from './render';

const api = new ApiClient(
  new URLSearchParams(location.search).get('service') ?? 'http://127.0.0.1:8350',
);
const queue = new MutationQueue();
let state: UiState = initialState();

function setState(next: UiState): void {
  state = next;
  render();
}

function render(): void {
  byId('directives-panel').innerHTML = renderDirectiveList(state);
  byId('editor-panel').innerHTML = renderDirectiveEditor(state);
  byId('document-panel').innerHTML = renderDocument(state);
  byId('source-panel').innerHTML = renderSourcePane(state);
  byId('diff-panel').innerHTML = renderDiffPane(state);
  byId('outcome-panel').innerHTML = renderOutcome(state.lastOutcome, state.banner);
  byId('history-panel').innerHTML = renderBlockHistory(state.blocks);
  wire();
}

function byId(id: string): HTMLElement {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing container #${id}`);
  return el;
}

function wire(): void {
  document.querySelectorAll<HTMLElement>('[data-testid="directive-item"]').forEach((item) => {
    item.addEventListener('click', () => {
      setState(selectDirective(state, item.dataset.id ?? ''));
      void refreshBlocks();
    });
  });

  const save = document.querySelector<HTMLButtonElement>('[data-testid="save-directive-btn"]');
  save?.addEventListener('click', () => void saveDirective());

  const trigger = document.querySelector<HTMLButtonElement>('[data-testid="trigger-action-btn"]');
  trigger?.addEventListener('click', () => void triggerAction());

  const purge = document.querySelector<HTMLButtonElement>('[data-testid="purge-btn"]');
  purge?.addEventListener('click', () => void purgeBlocks());
}

async function saveDirective(): Promise<void> {
  const id = state.selectedId;
  if (!id) return;
  const textarea = document.querySelector<HTMLTextAreaElement>('[data-testid="directive-text"]');
  const text = textarea?.value ?? '';
  const problem = validateEdit(text);
  const errorBox = document.querySelector<HTMLElement>('[data-testid="edit-error"]');
  if (problem) {
    if (errorBox) {
      errorBox.textContent = problem;
      errorBox.hidden = false;
    }
    return; // invalid edits never reach the service
  }
  await queue.enqueue(id, async () => {
    const updated = await api.updateDirective(id, text);
    setState(applyEdit(state, updated));
  });
}

async function triggerAction(): Promise<void> {
  const id = state.selectedId;
  if (!id) return;
  await queue.enqueue(id, async () => {
    const response = await api.invoke(id, []);
    setState(applyInvoke(state, response));
  });
  await refreshBlocks();
}

async function refreshBlocks(): Promise<void> {
  const id = state.selectedId;
  if (!id) return;
  setState(applyBlocks(state, await api.blocks(id)));
}

async function purgeBlocks(): Promise<void> {
  const purged = await api.purge('all');
  const toast = byId('toast');
  toast.textContent = `Purged ${purged} block record(s)`;
  toast.hidden = false;
  setTimeout(() => {
    toast.hidden = true;
  }, 2500);
  await refreshBlocks();
}

async function bootstrap(): Promise<void> {
  setState(withDirectives(state, await api.listDirectives()));
  await refreshBlocks();
}

void bootstrap();

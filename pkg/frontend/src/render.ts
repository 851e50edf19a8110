import { diffLines } from './diff';
import { selectedDirective, UiState } from './state';
import type { BlockView, OutcomeView } from './types';

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function renderDirectiveList(state: UiState): string {
  const items = state.directives
    .map((d) => {
      const active = d.id === state.selectedId ? ' directive-item--active' : '';
      return `
        <li class="directive-item${active}" data-id="${d.id}" data-testid="directive-item">
          <span class="directive-id">${escapeHtml(d.id)}</span>
          <span class="directive-entry">${escapeHtml(d.entry_point)}</span>
          <span class="version-badge" data-testid="version-badge">v${d.version}</span>
        </li>`;
    })
    .join('');
  return `<ul class="directive-list" data-testid="directive-list">${items}</ul>`;
}

export function renderDirectiveEditor(state: UiState): string {
  const directive = selectedDirective(state);
  if (!directive) {
    return `<div class="placeholder" data-testid="directive-editor">No directive selected</div>`;
  }
  const stale = state.staleBlock
    ? `<span class="stale-indicator" data-testid="stale-indicator">block out of date - trigger the action to regenerate</span>`
    : '';
  return `
    <div class="directive-editor" data-testid="directive-editor">
      <div class="editor-meta">
        <span class="entry-point">${escapeHtml(directive.entry_point)}</span>
        <span class="version-badge" data-testid="editor-version">v${directive.version}</span>
        ${stale}
      </div>
      <textarea class="directive-text" data-testid="directive-text">${escapeHtml(directive.text)}</textarea>
      <div class="editor-actions">
        <button class="btn btn-secondary" data-testid="save-directive-btn">Save directive</button>
        <button class="btn btn-primary" data-testid="trigger-action-btn">Trigger action</button>
      </div>
      <div class="inline-error" data-testid="edit-error" hidden></div>
    </div>`;
}

export function renderDocument(state: UiState): string {
  const warnings = state.warnings
    .map(
      (w) => `<div class="warning-row" data-testid="warning-row">
        <strong>${escapeHtml(w.title)}</strong> ${escapeHtml(w.message)}</div>`,
    )
    .join('');
  return `
    <div class="document-pane" data-testid="document-pane">
      <div class="panel-header">Demo document</div>
      ${warnings}
      <textarea class="document-text" data-testid="document-text">${escapeHtml(state.documentText)}</textarea>
    </div>`;
}

export function renderSourcePane(state: UiState): string {
  const block = state.lastBlock;
  if (!block) {
    return `<div class="placeholder" data-testid="source-pane">No block yet - trigger the action</div>`;
  }
  const status = block.status === 'ready'
    ? `<span class="status status--ok">ready</span>`
    : `<span class="status status--failed">failed</span>`;
  return `
    <div class="source-pane" data-testid="source-pane">
      <div class="panel-header">
        Generated source ${status}
        <code class="source-hash" data-testid="source-hash">${block.source_hash || '-'}</code>
        <span data-testid="block-version">for v${block.directive_version}</span>
      </div>
      <pre class="source-code" data-testid="source-code">${escapeHtml(block.source)}</pre>
    </div>`;
}

export function renderDiffPane(state: UiState): string {
  if (!state.lastBlock || state.previousSource === null) {
    return `<div class="placeholder" data-testid="diff-pane">No previous block to compare</div>`;
  }
  const rows = diffLines(state.previousSource, state.lastBlock.source)
    .map((row) => {
      const marker = row.kind === 'added' ? '+' : row.kind === 'removed' ? '-' : ' ';
      return `<div class="diff-row diff-row--${row.kind}" data-testid="diff-row-${row.kind}">${marker} ${escapeHtml(row.text)}</div>`;
    })
    .join('');
  return `<div class="diff-pane" data-testid="diff-pane">${rows}</div>`;
}

export function renderOutcome(outcome: OutcomeView | null, banner: string | null): string {
  const bannerHtml = banner
    ? `<div class="failure-banner" data-testid="failure-banner">${escapeHtml(banner)}</div>`
    : '';
  if (!outcome) {
    return `${bannerHtml}<div class="placeholder" data-testid="outcome-pane">No invocation yet</div>`;
  }
  return `
    ${bannerHtml}
    <div class="outcome-pane outcome--${outcome.status}" data-testid="outcome-pane">
      <span class="outcome-status" data-testid="outcome-status">${outcome.status}</span>
      <span class="outcome-elapsed">${outcome.elapsed_ms} ms</span>
      ${outcome.error_message ? `<pre>${escapeHtml(outcome.error_message)}</pre>` : ''}
    </div>`;
}

export function renderBlockHistory(blocks: BlockView[]): string {
  if (blocks.length === 0) {
    return `<div class="placeholder" data-testid="block-history">No stored blocks</div>`;
  }
  const rows = blocks
    .map(
      (b) => `
      <details class="block-row" data-testid="block-row">
        <summary>
          <code>${b.source_hash ? b.source_hash.slice(0, 12) : '------------'}</code>
          <span class="status status--${b.status}">${b.status}</span>
          <span class="block-time">${escapeHtml(b.created_at)}</span>
        </summary>
        ${b.failure
          ? `<div class="failure-detail" data-testid="failure-detail">${escapeHtml(b.failure.category)} at ${escapeHtml(b.failure.stage)}: ${escapeHtml(b.failure.detail)}</div>`
          : `<pre class="source-code">${escapeHtml(b.source)}</pre>`}
      </details>`,
    )
    .join('');
  return `
    <div class="block-history" data-testid="block-history">
      ${rows}
      <button class="btn btn-danger" data-testid="purge-btn">Purge all blocks</button>
    </div>`;
}

import { describe, expect, it } from 'vitest';

import { renderBlockHistory, renderDiffPane, renderDirectiveEditor, renderOutcome, renderSourcePane } from '../src/render';
import { applyEdit, applyInvoke, initialState, withDirectives } from '../src/state';
import type { BlockView, DirectiveView, InvokeResponse } from '../src/types';

const directive: DirectiveView = {
  id: 'open_file',
  entry_point: 'onOpenDynamic',
  text: 'Open a file <carefully>.',
  context_sources: [],
  version: 1,
};

const readyBlock: BlockView = {
  directive_id: 'open_file',
  directive_version: 1,
  cache_key: 'k'.repeat(64),
  raw_response: '',
  source: 'def onOpenDynamic(self):\n    pass',
  source_hash: 'a'.repeat(64),
  status: 'ready',
  failure: null,
  created_at: '2026-08-09T12:00:00.000Z',
};

const response: InvokeResponse = {
  outcome: { status: 'ok', value: null, error_message: '', elapsed_ms: 7 },
  block: readyBlock,
  effects: { text: 'doc', warnings: [] },
};

describe('rendering', () => {
  it('editor shows version badge and escapes directive text', () => {
    const state = withDirectives(initialState(), [directive]);
    const html = renderDirectiveEditor(state);
    expect(html).toContain('data-testid="editor-version">v1<');
    expect(html).toContain('&lt;carefully&gt;');
    expect(html).not.toContain('stale-indicator');
  });

  it('stale indicator appears after an edit with a live block', () => {
    let state = withDirectives(initialState(), [directive]);
    state = applyInvoke(state, response);
    state = applyEdit(state, { ...directive, version: 2 });
    expect(renderDirectiveEditor(state)).toContain('data-testid="stale-indicator"');
  });

  it('source pane displays the block hash', () => {
    let state = withDirectives(initialState(), [directive]);
    state = applyInvoke(state, response);
    expect(renderSourcePane(state)).toContain('a'.repeat(64));
  });

  it('diff pane marks added warning lines', () => {
    let state = withDirectives(initialState(), [directive]);
    state = applyInvoke(state, response);
    const v2: BlockView = {
      ...readyBlock,
      directive_version: 2,
      source: 'def onOpenDynamic(self):\n    self.show_warning("W", "busy")\n    pass',
      source_hash: 'b'.repeat(64),
    };
    state = applyInvoke(state, { ...response, block: v2 });
    const html = renderDiffPane(state);
    expect(html).toContain('data-testid="diff-row-added"');
    expect(html).toContain('show_warning');
  });

  it('outcome pane renders failure banners', () => {
    const html = renderOutcome(null, 'ExtractionFailure: no fence');
    expect(html).toContain('data-testid="failure-banner"');
    expect(html).toContain('ExtractionFailure');
  });

  it('block history rows expand failure detail', () => {
    const failed: BlockView = {
      ...readyBlock,
      status: 'failed',
      source: '',
      source_hash: '',
      failure: { category: 'CompileError', detail: 'line 1: bad', stage: 'compile' },
    };
    const html = renderBlockHistory([failed]);
    expect(html).toContain('data-testid="failure-detail"');
    expect(html).toContain('CompileError at compile');
    expect(html).toContain('data-testid="purge-btn"');
  });
});

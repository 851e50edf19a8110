import type { BlockView, DirectiveView, InvokeResponse } from './types';

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

async function parse<T>(reply: Response): Promise<T> {
  const body = await reply.json().catch(() => ({}));
  if (!reply.ok) {
    const detail = (body as { error?: string; detail?: string }).error
      ?? (body as { detail?: string }).detail
      ?? reply.statusText;
    throw new ApiError(reply.status, detail);
  }
  return body as T;
}

export class ApiClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, '') + path;
  }

  health(): Promise<{ status: string }> {
    return fetch(this.url('/api/health')).then((r) => parse(r));
  }

  listDirectives(): Promise<DirectiveView[]> {
    return fetch(this.url('/api/directives'))
      .then((r) => parse<{ directives: DirectiveView[] }>(r))
      .then((body) => body.directives);
  }

  getDirective(id: string): Promise<DirectiveView> {
    return fetch(this.url(`/api/directives/${id}`)).then((r) => parse(r));
  }

  updateDirective(id: string, text: string): Promise<DirectiveView> {
    return fetch(this.url(`/api/directives/${id}`), {
      method: 'PUT',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ text }),
    }).then((r) => parse(r));
  }

  invoke(id: string, args: unknown[] = []): Promise<InvokeResponse> {
    return fetch(this.url(`/api/directives/${id}/invoke`), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ args }),
    }).then((r) => parse(r));
  }

  regenerate(id: string): Promise<BlockView> {
    return fetch(this.url(`/api/directives/${id}/regenerate`), { method: 'POST' })
      .then((r) => parse(r));
  }

  blocks(directiveId?: string): Promise<BlockView[]> {
    const query = directiveId ? `?directive=${encodeURIComponent(directiveId)}` : '';
    return fetch(this.url(`/api/blocks${query}`))
      .then((r) => parse<{ blocks: BlockView[] }>(r))
      .then((body) => body.blocks);
  }

  purge(scope: 'all' | 'failed_only' | { older_than_ms: number }): Promise<number> {
    return fetch(this.url('/api/purge'), {
      method: 'POST',
      headers: { 'content-type': 'application/json' },
      body: JSON.stringify({ scope }),
    })
      .then((r) => parse<{ purged: number }>(r))
      .then((body) => body.purged);
  }
}

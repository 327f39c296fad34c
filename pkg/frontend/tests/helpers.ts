// Shared test doubles: a scriptable fetch and canned API payloads.

export interface RecordedCall {
  url: string;
  method: string;
  headers: Record<string, string>;
  body: unknown;
}

export function fakeFetch(
  respond: (url: string, init: RequestInit) => { status: number; body: unknown },
): { fetchFn: typeof fetch; calls: RecordedCall[] } {
  const calls: RecordedCall[] = [];
  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = String(input);
    const { status, body } = respond(url, init ?? {});
    calls.push({
      url,
      method: init?.method ?? 'GET',
      headers: (init?.headers ?? {}) as Record<string, string>,
      body: init?.body ? JSON.parse(String(init.body)) : undefined,
    });
    return {
      ok: status < 400,
      status,
      statusText: `status ${status}`,
      json: async () => body,
    } as Response;
  }) as typeof fetch;
  return { fetchFn, calls };
}

export function errorEnvelope(code: string, message: string): unknown {
  return { error: { code, message } };
}

export const FEED_PAGE = {
  section: 'physics/cmp',
  as_of: '2026-02-01T00:00:00+00:00',
  next_cursor: null,
  papers: [
    {
      paper_id: 'tum-p1',
      doi: '10.9999/tum.1',
      origin_node: 'tum',
      title: 'Layered magnetism revisited',
      authors: ['A. Author'],
      keywords: ['physics/cmp/layered'],
      rr: 3.5,
      cr: 4.25,
      cr_count: 8,
      portal_level: 4,
      score: 3.8,
      published_at: '2026-01-20T00:00:00+00:00',
      red_flagged: false,
    },
  ],
};

export const INVITATIONS = [
  {
    paper_id: 'tum-p2',
    title: 'A bold claim',
    authors: null,
    keywords: ['physics/cmp'],
    status: 'Invited',
    round: 0,
    invited_at: '2026-02-01T00:00:00+00:00',
    declared_deadline: null,
    paper_state: 'UnderReview',
  },
  {
    paper_id: 'tum-p3',
    title: 'A careful measurement',
    authors: ['B. Author'],
    keywords: ['physics/cmp'],
    status: 'Accepted',
    round: 0,
    invited_at: '2026-02-01T00:00:00+00:00',
    declared_deadline: '2026-02-20T00:00:00+00:00',
    paper_state: 'UnderReview',
  },
  {
    paper_id: 'tum-p4',
    title: 'An older assignment',
    authors: ['C. Author'],
    keywords: ['physics/cmp'],
    status: 'ExcludedLate',
    round: 0,
    invited_at: '2026-01-01T00:00:00+00:00',
    declared_deadline: '2026-01-15T00:00:00+00:00',
    paper_state: 'Published',
  },
];

export const PUBLISHED_PAPER = {
  paper_id: 'tum-p1',
  state: 'Published',
  title: 'Layered magnetism revisited',
  authors: ['A. Author'],
  keywords: ['physics/cmp/layered'],
  doi: '10.9999/tum.1',
  rr: 3.5,
  cr: 4.25,
  cr_count: 8,
  published_at: '2026-01-20T00:00:00+00:00',
  red_flagged: false,
  remote: false,
  reviews: [
    { rater: 'R. Reader', value: 4, comment: 'Solid, reproducible.', at: '2026-01-25T00:00:00+00:00' },
    { rater: null, value: 5, comment: 'Checked the derivation.', at: '2026-01-26T00:00:00+00:00' },
  ],
};

export const HISTORY = {
  paper_id: 'tum-p1',
  rr: 3.5,
  cr: 4.25,
  votes: [
    { at: '2026-01-25T00:00:00+00:00', value: 4 },
    { at: '2026-01-26T00:00:00+00:00', value: 5 },
    { at: '2026-01-27T00:00:00+00:00', value: 4 },
  ],
  red_flagged: false,
};

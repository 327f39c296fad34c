// Typed client for the node's JSON API. All business rules live server-side;
// this layer only shapes requests and surfaces the error envelope.

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export interface Session {
  token: string;
  userId: string;
  scope: string;
}

export interface Quota {
  year: number;
  limit: number;
  used: number;
}

export interface Account {
  user_id: string;
  display_name: string;
  institution: string;
  keywords: string[];
  quota: Quota;
  cooldown_until: string | null;
  iar_cap: number | null;
  reward_points: number;
  published_papers: number;
}

export interface FeedPaper {
  paper_id: string;
  doi: string;
  origin_node: string;
  title: string;
  authors: string[];
  keywords: string[];
  rr: number;
  cr: number | null;
  cr_count: number;
  portal_level: number;
  score: number;
  published_at: string;
  red_flagged: boolean;
}

export interface FeedPage {
  section: string;
  papers: FeedPaper[];
  next_cursor: string | null;
  as_of: string;
}

export interface NewSubmission {
  paper_id: string;
  title: string;
  keywords: string[];
  iar: number;
  authors: string[] | null;
  submitted_at: string;
  editorial_deadline: string;
}

export interface Invitation {
  paper_id: string;
  title: string;
  authors: string[] | null;
  keywords: string[];
  status: string;
  round: number;
  invited_at: string;
  declared_deadline: string | null;
  paper_state: string;
}

export interface PaperView {
  paper_id: string;
  state: string;
  title: string;
  authors: string[] | null;
  keywords: string[];
  doi?: string;
  rr?: number | null;
  cr?: number | null;
  cr_count?: number;
  published_at?: string;
  red_flagged?: boolean;
  remote?: boolean;
  iar?: number;
  editorial_deadline?: string;
  reviews?: Array<{ rater: string | null; value: number; comment: string; at: string }>;
}

export interface RatingsHistory {
  paper_id: string;
  rr: number | null;
  cr: number | null;
  votes: Array<{ at: string; value: number }>;
  red_flagged: boolean;
}

export interface LedgerView {
  user_id: string;
  balance: number;
  entries: Array<{ at: string; kind: string; points_delta: number; reason: string; paper_id: string | null }>;
}

export interface ManuscriptDraft {
  title: string;
  content: string;
  keywords: string[];
  iar: number;
  co_authors?: string[];
  anonymous_review?: boolean;
  excluded_referees?: string[];
  suggested_referees?: string[];
}

async function parseError(res: Response): Promise<ApiError> {
  let code = 'Internal';
  let message = res.statusText;
  try {
    const body = await res.json();
    if (body && body.error) {
      code = body.error.code ?? code;
      message = body.error.message ?? message;
    }
  } catch {
    // non-JSON error body: keep the status text
  }
  return new ApiError(code, message, res.status);
}

export class PortalApi {
  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchFn: typeof fetch = fetch,
    private token: string | null = null,
  ) {}

  setToken(token: string | null): void {
    this.token = token;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { 'content-type': 'application/json' };
    if (this.token) headers['authorization'] = `Bearer ${this.token}`;
    const res = await this.fetchFn(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!res.ok) throw await parseError(res);
    return (await res.json()) as T;
  }

  register(identity: string, keywords: string[], institution?: string): Promise<Account> {
    return this.request('POST', '/users', { identity, keywords, institution: institution ?? null });
  }

  async createSession(userId: string): Promise<Session> {
    const res = await this.request<{ token: string; scope: string }>('POST', '/sessions', {
      user_id: userId,
    });
    return { token: res.token, userId, scope: res.scope };
  }

  me(): Promise<Account> {
    return this.request('GET', '/users/me');
  }

  feed(path: string, cursor?: string | null): Promise<FeedPage> {
    const clean = path.replace(/^\/+|\/+$/g, '');
    const query = cursor ? `?cursor=${encodeURIComponent(cursor)}` : '';
    return this.request('GET', `/portal/${clean}${query}`);
  }

  newSubmissions(section = ''): Promise<{ submissions: NewSubmission[] }> {
    const query = section ? `?section=${encodeURIComponent(section)}` : '';
    return this.request('GET', `/submissions/new${query}`);
  }

  submitManuscript(draft: ManuscriptDraft): Promise<PaperView> {
    return this.request('POST', '/manuscripts', draft);
  }

  castInitialRating(paperId: string, value: number): Promise<{ recorded: boolean }> {
    return this.request('POST', `/manuscripts/${paperId}/initial-rating`, { value });
  }

  submitRevision(paperId: string, content: string): Promise<{ recorded: boolean }> {
    return this.request('POST', `/manuscripts/${paperId}/revision`, { content });
  }

  invitations(): Promise<{ invitations: Invitation[] }> {
    return this.request('GET', '/referee/invitations');
  }

  acceptInvitation(paperId: string, deadlineDays: number): Promise<{ accepted: boolean }> {
    return this.request('POST', `/referee/invitations/${paperId}/accept`, {
      deadline_days: deadlineDays,
    });
  }

  declineInvitation(paperId: string): Promise<{ declined: boolean }> {
    return this.request('POST', `/referee/invitations/${paperId}/decline`, {});
  }

  fileReport(
    paperId: string,
    verdict: 'Accept' | 'MinorRevision' | 'Reject',
    rating: number,
    text: string,
    structuralFlaw: boolean,
  ): Promise<{ recorded: boolean }> {
    return this.request('POST', `/referee/reports/${paperId}`, {
      verdict,
      rating,
      text,
      structural_flaw: structuralFlaw,
    });
  }

  paper(paperId: string): Promise<PaperView> {
    return this.request('GET', `/papers/${paperId}`);
  }

  ratingsHistory(paperId: string): Promise<RatingsHistory> {
    return this.request('GET', `/papers/${paperId}/ratings-history`);
  }

  communityReview(
    paperId: string,
    value: number,
    comment: string,
    publicName: boolean,
  ): Promise<{ cr: number; cr_count: number }> {
    return this.request('POST', `/papers/${paperId}/community-review`, {
      value,
      comment,
      public_name: publicName,
    });
  }

  ledger(): Promise<LedgerView> {
    return this.request('GET', '/rewards/ledger');
  }

  spend(
    action: 'VisibilityBoost' | 'QuotaExtension' | 'CooldownReduction',
    paperId?: string,
  ): Promise<{ balance: number; action: string }> {
    return this.request('POST', '/rewards/spend', { action, paper_id: paperId ?? null });
  }
}

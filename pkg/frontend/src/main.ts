// Browser bootstrap: hash routing, command dispatch, acknowledgment-gated
// rendering. Every gate (eligibility, windows, quotas) is the server's; this
// shell only translates error codes into their single renderings.

import { ApiError, PortalApi } from './api.js';
import { renderError } from './errors.js';
import { MIN_COMMENT_CHARS, commentLength, esc } from './format.js';
import { ViewState, runCommand, type View } from './state.js';
import { renderFeed } from './views/feed.js';
import { renderPaper } from './views/paper.js';
import { renderRefereeDashboard } from './views/referee.js';
import { renderRewards } from './views/rewards.js';
import { renderNewSubmissions, renderSubmissionForm } from './views/submissions.js';

function apiBase(): string {
  const meta = document.querySelector('meta[name="scholarnode-api"]');
  return meta?.getAttribute('content') ?? '';
}

export class App {
  readonly state = new ViewState();
  private readonly api: PortalApi;
  private account: Awaited<ReturnType<PortalApi['me']>> | null = null;
  private ownPaperIds = new Set<string>();

  constructor(
    private readonly root: HTMLElement,
    api?: PortalApi,
  ) {
    this.api = api ?? new PortalApi(apiBase());
  }

  start(): void {
    window.addEventListener('hashchange', () => void this.route());
    this.root.addEventListener('submit', (ev) => void this.onSubmit(ev));
    this.root.addEventListener('click', (ev) => void this.onClick(ev));
    this.root.addEventListener('input', (ev) => this.onInput(ev));
    void this.route();
  }

  parseRoute(hash: string): View {
    const path = hash.replace(/^#\/?/, '');
    if (path.startsWith('feed')) return { kind: 'feed', path: path.slice(5) };
    if (path === 'new') return { kind: 'new-submissions' };
    if (path === 'submit') return { kind: 'submission-form' };
    if (path === 'referee') return { kind: 'referee-dashboard' };
    if (path.startsWith('papers/')) return { kind: 'paper', paperId: path.slice(7) };
    if (path === 'rewards') return { kind: 'rewards' };
    return { kind: 'feed', path: '' };
  }

  async route(): Promise<void> {
    this.state.view = this.parseRoute(window.location.hash);
    await this.render();
  }

  private banner(html: string, tone: 'error' | 'ok'): void {
    const el = this.root.querySelector('[data-role="banner"]');
    if (el) el.innerHTML = `<div class="banner ${tone}">${html}</div>`;
  }

  async render(): Promise<void> {
    const view = this.state.view;
    let body = '';
    try {
      if (view.kind === 'feed') {
        body = renderFeed(await this.api.feed(view.path));
      } else if (view.kind === 'new-submissions') {
        const listing = await this.api.newSubmissions();
        body = renderNewSubmissions(
          listing.submissions, this.ownPaperIds, Date.now(), this.state.session !== null,
        );
      } else if (view.kind === 'submission-form') {
        body = renderSubmissionForm(this.account);
      } else if (view.kind === 'referee-dashboard') {
        const listing = this.state.session ? await this.api.invitations() : { invitations: [] };
        body = this.state.session
          ? renderRefereeDashboard(listing.invitations, Date.now())
          : `<p class="signin-hint">Sign in to see your invitations.</p>`;
      } else if (view.kind === 'paper') {
        const paper = await this.api.paper(view.paperId);
        const history =
          paper.state === 'Published' && !paper.remote
            ? await this.api.ratingsHistory(view.paperId)
            : null;
        body = renderPaper(paper, history, this.state.session?.userId ?? null);
      } else {
        const ledger = this.state.session ? await this.api.ledger() : null;
        body = renderRewards(ledger, this.account);
      }
    } catch (err) {
      body = `<div class="banner error">${esc(renderError(err))}</div>`;
    }
    this.root.innerHTML = `
      ${this.renderChrome()}
      <div data-role="banner"></div>
      <main>${body}</main>`;
  }

  private renderChrome(): string {
    const who = this.state.session
      ? `<span class="who">${esc(this.account?.display_name ?? this.state.session.userId)}</span>`
      : `
        <form class="signin" data-action="sign-in">
          <input name="identity" placeholder="email or ORCID iD" required>
          <input name="keywords" placeholder="keywords e.g. physics/cmp" required>
          <button type="submit">Sign in / register</button>
        </form>`;
    return `
      <header>
        <a class="brand" href="#/feed/">scholarnode</a>
        <nav>
          <a href="#/feed/">Feeds</a>
          <a href="#/new">New submissions</a>
          <a href="#/submit">Submit</a>
          <a href="#/referee">Referee desk</a>
          <a href="#/rewards">Rewards</a>
        </nav>
        ${who}
      </header>`;
  }

  private async onSubmit(ev: Event): Promise<void> {
    const form = ev.target as HTMLFormElement;
    if (!form.dataset.action) return;
    ev.preventDefault();
    const fields = new FormData(form);
    const action = form.dataset.action;
    if (action === 'sign-in') {
      await this.signIn(String(fields.get('identity')), String(fields.get('keywords')));
    } else if (action === 'submit-manuscript') {
      await this.submitManuscript(fields);
    } else if (action === 'initial-rating') {
      await this.command('editorial rating', () =>
        this.api.castInitialRating(form.dataset.paper ?? '', Number(fields.get('value'))),
      'Your impact rating is recorded.');
    } else if (action === 'accept-invitation') {
      await this.command('accept invitation', () =>
        this.api.acceptInvitation(form.dataset.paper ?? '', Number(fields.get('deadline_days'))),
      'Invitation accepted; the deadline is on your board.');
    } else if (action === 'file-report') {
      await this.command('file report', () =>
        this.api.fileReport(
          form.dataset.paper ?? '',
          String(fields.get('verdict')) as 'Accept' | 'MinorRevision' | 'Reject',
          Number(fields.get('rating')),
          String(fields.get('text') ?? ''),
          fields.get('structural_flaw') === 'on',
        ),
      'Report filed.');
    } else if (action === 'community-review') {
      await this.command('community review', () =>
        this.api.communityReview(
          form.dataset.paper ?? '',
          Number(fields.get('value')),
          String(fields.get('comment') ?? ''),
          fields.get('public_name') === 'on',
        ),
      'Your community review is recorded permanently.');
    } else if (action === 'spend') {
      const kind = form.dataset.spend as 'VisibilityBoost' | 'QuotaExtension' | 'CooldownReduction';
      const paperId = fields.get('paper_id');
      await this.command('spend points', () =>
        this.api.spend(kind, paperId ? String(paperId) : undefined),
      'Done.');
    }
  }

  private async onClick(ev: Event): Promise<void> {
    const el = ev.target as HTMLElement;
    const action = el.dataset?.action;
    if (action === 'decline-invitation') {
      ev.preventDefault();
      await this.command('decline invitation', () =>
        this.api.declineInvitation(el.dataset.paper ?? ''),
      'Invitation declined.');
    } else if (action === 'feed-more' && this.state.view.kind === 'feed') {
      ev.preventDefault();
      const page = await this.api.feed(this.state.view.path, el.dataset.cursor);
      const list = this.root.querySelector('.feed ul.papers');
      if (list) {
        const fragment = renderFeed(page);
        const extra = new DOMParser().parseFromString(fragment, 'text/html');
        extra.querySelectorAll('.paper-row').forEach((row) => list.appendChild(row));
        el.toggleAttribute('hidden', page.next_cursor === null);
        if (page.next_cursor) el.dataset.cursor = page.next_cursor;
      }
    }
  }

  // local comment counter for usability; the server stays authoritative
  private onInput(ev: Event): void {
    const el = ev.target as HTMLTextAreaElement;
    if (el.name !== 'comment') return;
    const form = el.closest('form');
    const counter = form?.querySelector('[data-role="char-count"]');
    const button = form?.querySelector('button[type="submit"]') as HTMLButtonElement | null;
    const length = commentLength(el.value);
    if (counter) counter.textContent = `${length}/${MIN_COMMENT_CHARS}`;
    if (button) button.disabled = length < MIN_COMMENT_CHARS;
  }

  private async signIn(identity: string, keywordsRaw: string): Promise<void> {
    const keywords = keywordsRaw.split(/[,\s]+/).filter((k) => k.length > 0);
    try {
      let account;
      try {
        account = await this.api.register(identity, keywords);
      } catch (err) {
        if (!(err instanceof ApiError) || err.code !== 'DuplicateAccount') throw err;
        account = null;
      }
      const userId = account?.user_id ?? (await this.lookupByIdentity(identity));
      const session = await this.api.createSession(userId);
      this.api.setToken(session.token);
      this.state.session = session;
      this.account = await this.api.me();
      await this.render();
    } catch (err) {
      await this.render();
      this.banner(esc(renderError(err)), 'error');
    }
  }

  private async lookupByIdentity(_identity: string): Promise<string> {
    // the demo node keeps sessions by user id; returning accounts echo it
    throw new ApiError('UnknownUser', 'Sign-in for existing accounts needs your user id.', 404);
  }

  private async submitManuscript(fields: FormData): Promise<void> {
    const split = (name: string) =>
      String(fields.get(name) ?? '')
        .split(/[,\s]+/)
        .filter((s) => s.length > 0);
    const result = await runCommand(this.state, 'submit manuscript', () =>
      this.api.submitManuscript({
        title: String(fields.get('title')),
        content: String(fields.get('content')),
        keywords: String(fields.get('keywords') ?? '')
          .split(/\n+/)
          .map((k) => k.trim())
          .filter((k) => k.length > 0),
        iar: Number(fields.get('iar')),
        co_authors: split('co_authors'),
        excluded_referees: split('excluded_referees'),
        suggested_referees: split('suggested_referees'),
        anonymous_review: fields.get('anonymous_review') === 'on',
      }),
    );
    if (result.ok) {
      this.ownPaperIds.add(result.value.paper_id);
      window.location.hash = '#/new';
      await this.render();
      this.banner('Submitted: the community editorial window is open.', 'ok');
    } else {
      await this.render();
      this.banner(esc(renderError(result.error)), 'error');
    }
  }

  private async command<T>(
    label: string,
    action: () => Promise<T>,
    okMessage: string,
  ): Promise<void> {
    const result = await runCommand(this.state, label, action);
    await this.render();
    if (result.ok) {
      this.banner(esc(okMessage), 'ok');
    } else {
      this.banner(esc(renderError(result.error)), 'error');
    }
    if (this.state.session) this.account = await this.api.me().catch(() => this.account);
  }
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
  new App(document.getElementById('app') as HTMLElement).start();
}

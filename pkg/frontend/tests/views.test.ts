import { describe, expect, it } from 'vitest';

import type { FeedPage, RatingsHistory } from '../src/api.js';
import { renderFeed } from '../src/views/feed.js';
import { renderPaper, renderSparkline } from '../src/views/paper.js';
import { DEADLINE_MAX_DAYS, DEADLINE_MIN_DAYS, renderRefereeDashboard } from '../src/views/referee.js';
import { renderRewards } from '../src/views/rewards.js';
import { renderNewSubmissions, renderSubmissionForm } from '../src/views/submissions.js';
import { FEED_PAGE, HISTORY, INVITATIONS, PUBLISHED_PAPER } from './helpers.js';

const NOW = Date.parse('2026-02-05T00:00:00Z');

describe('feed view', () => {
  it('shows fetched RR, CR and rating-count badges verbatim', () => {
    const html = renderFeed(FEED_PAGE as FeedPage);
    expect(html).toContain('RR 3.5');
    expect(html).toContain('CR 4.25');       // displayed, never recomputed
    expect(html).toContain('8 community ratings');
    expect(html).toContain('10.9999/tum.1');
  });

  it('renders the breadcrumb from the keyword path', () => {
    const html = renderFeed(FEED_PAGE as FeedPage);
    expect(html).toContain('href="#/feed/physics"');
    expect(html).toContain('<span class="crumb current">cmp</span>');
  });

  it('shows an explicit empty state', () => {
    const html = renderFeed({ ...FEED_PAGE, papers: [] } as FeedPage);
    expect(html).toContain('No papers in this section yet.');
  });

  it('offers a cursor-carrying more button only when a next page exists', () => {
    const more = renderFeed({ ...FEED_PAGE, next_cursor: 'abc==' } as FeedPage);
    expect(more).toContain('data-cursor="abc=="');
    expect(renderFeed(FEED_PAGE as FeedPage)).not.toContain('data-action="feed-more"');
  });

  it('escapes hostile titles', () => {
    const page = {
      ...FEED_PAGE,
      papers: [{ ...FEED_PAGE.papers[0]!, title: '<script>alert(1)</script>' }],
    } as FeedPage;
    expect(renderFeed(page)).not.toContain('<script>alert');
  });
});

describe('new submissions view', () => {
  const items = [
    {
      paper_id: 'tum-p9',
      title: 'Fresh work',
      keywords: ['physics/cmp'],
      iar: 4,
      authors: null,
      submitted_at: '2026-02-01T00:00:00+00:00',
      editorial_deadline: '2026-02-08T00:00:00+00:00',
    },
  ];

  it('conceals authors and shows the self-rating with a countdown', () => {
    const html = renderNewSubmissions(items, new Set(), NOW, true);
    expect(html).toContain('authors concealed');
    expect(html).toContain('self-rated 4');
    expect(html).toContain('3d 0h left');
    expect(html).toContain('data-action="initial-rating"');
  });

  it('never renders the rating widget on the submitter own manuscript', () => {
    const html = renderNewSubmissions(items, new Set(['tum-p9']), NOW, true);
    expect(html).not.toContain('data-action="initial-rating"');
    expect(html).toContain('your submission');
  });

  it('editorial votes use the 1..5 scale with no zero', () => {
    const html = renderNewSubmissions(items, new Set(), NOW, true);
    expect(html).not.toContain('<option value="0">');
    expect(html).toContain('<option value="1">');
    expect(html).toContain('<option value="5">');
  });
});

describe('submission form', () => {
  const account = {
    user_id: 'u1', display_name: 'A', institution: 'inst', keywords: [],
    quota: { year: 2026, limit: 5, used: 2 }, cooldown_until: null,
    iar_cap: null, reward_points: 0, published_papers: 0,
  };

  it('shows remaining quota', () => {
    expect(renderSubmissionForm(account)).toContain('3 of 5 uploads left in 2026');
  });

  it('caps the self-rating selector when a cap is active', () => {
    const capped = renderSubmissionForm({ ...account, iar_cap: 3 });
    expect(capped).toContain('temporarily capped at 3');
    expect(capped).not.toContain('<option value="4">');
    expect(capped).toContain('<option value="3">');
  });
});

describe('referee dashboard', () => {
  it('constrains the deadline picker to the 14-28 day window', () => {
    const html = renderRefereeDashboard(INVITATIONS as never, NOW);
    expect(DEADLINE_MIN_DAYS).toBe(14);
    expect(DEADLINE_MAX_DAYS).toBe(28);
    expect(html).toContain('min="14" max="28"');
  });

  it('offers no zero in the referee rating selector', () => {
    const html = renderRefereeDashboard(INVITATIONS as never, NOW);
    const reportPart = html.slice(html.indexOf('data-action="file-report"'));
    expect(reportPart).not.toContain('<option value="0">');
    expect(reportPart).toContain('<option value="1">');
  });

  it('shows accept/decline for open invitations and a countdown for accepted ones', () => {
    const html = renderRefereeDashboard(INVITATIONS as never, NOW);
    expect(html).toContain('data-action="accept-invitation"');
    expect(html).toContain('data-action="decline-invitation"');
    expect(html).toContain('15d 0h left');
  });

  it('mirrors the server late-exclusion status', () => {
    const html = renderRefereeDashboard(INVITATIONS as never, NOW);
    expect(html).toContain('excluded late');
  });

  it('hides author names on anonymous-review manuscripts', () => {
    const html = renderRefereeDashboard(INVITATIONS as never, NOW);
    expect(html).toContain('authors anonymous');
  });
});

describe('paper page', () => {
  it('renders fetched aggregates and the review list', () => {
    const html = renderPaper(PUBLISHED_PAPER as never, HISTORY as RatingsHistory, 'u9');
    expect(html).toContain('RR 3.5');
    expect(html).toContain('CR 4.25');
    expect(html).toContain('Solid, reproducible.');
    expect(html).toContain('anonymous');
  });

  it('community review selector includes the zero vote', () => {
    const html = renderPaper(PUBLISHED_PAPER as never, HISTORY as RatingsHistory, 'u9');
    const formPart = html.slice(html.indexOf('data-action="community-review"'));
    expect(formPart).toContain('<option value="0">');
    expect(formPart).toContain('at least 200 characters');
  });

  it('raises the red-flag banner only when the API says so', () => {
    const flagged = renderPaper({ ...PUBLISHED_PAPER, red_flagged: true } as never,
                                HISTORY as RatingsHistory, null);
    expect(flagged).toContain('banner red-flag');
    const clean = renderPaper(PUBLISHED_PAPER as never, HISTORY as RatingsHistory, null);
    expect(clean).not.toContain('banner red-flag');
  });

  it('draws the CR sparkline from the ratings-history endpoint data', () => {
    const svg = renderSparkline(HISTORY as RatingsHistory);
    expect(svg).toContain('<svg');
    expect(svg.match(/<polyline/g)).toHaveLength(1);
    expect(svg).toContain('points="0.0,6.0 50.0,0.0 100.0,6.0"');
  });
});

describe('rewards view', () => {
  it('lists the ledger and spend actions', () => {
    const ledger = {
      user_id: 'u1',
      balance: 60,
      entries: [
        { at: '2026-02-01T00:00:00+00:00', kind: 'EarnOnTimeReview', points_delta: 10,
          reason: 'on_time_review', paper_id: 'tum-p1' },
      ],
    };
    const account = {
      user_id: 'u1', display_name: 'A', institution: 'i', keywords: [],
      quota: { year: 2026, limit: 5, used: 0 }, cooldown_until: null,
      iar_cap: null, reward_points: 60, published_papers: 1,
    };
    const html = renderRewards(ledger, account);
    expect(html).toContain('Balance: <strong>60</strong>');
    expect(html).toContain('+10');
    expect(html).toContain('data-spend="VisibilityBoost"');
    expect(html).toContain('data-spend="QuotaExtension"');
    expect(html).toContain('data-spend="CooldownReduction"');
  });
});

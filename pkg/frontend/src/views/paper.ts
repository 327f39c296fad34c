import type { PaperView, RatingsHistory } from '../api.js';
import { MIN_COMMENT_CHARS, esc, formatRating, sparklinePoints } from '../format.js';

// Community votes admit the full 0..5 scale; 0 exists only here.
function crOptions(): string {
  return [0, 1, 2, 3, 4, 5].map((v) => `<option value="${v}">${v}</option>`).join('');
}

export function renderSparkline(history: RatingsHistory): string {
  if (history.votes.length === 0) return '';
  const points = sparklinePoints(history.votes.map((v) => v.value));
  return `
    <svg class="sparkline" viewBox="0 0 100 30" preserveAspectRatio="none" role="img"
         aria-label="community rating history">
      <polyline fill="none" stroke="currentColor" stroke-width="1.5" points="${points}"></polyline>
    </svg>`;
}

export function renderPaper(
  paper: PaperView,
  history: RatingsHistory | null,
  sessionUserId: string | null,
): string {
  if (paper.state !== 'Published') {
    return `
      <section class="paper">
        <h2>${esc(paper.title)}</h2>
        <p class="state">Status: ${esc(paper.state)}</p>
        ${paper.iar !== undefined ? `<span class="badge iar">self-rated ${paper.iar}</span>` : ''}
      </section>`;
  }
  const flag = paper.red_flagged
    ? `<div class="banner red-flag">Recent community ratings trend well below this paper's standing. Read critically.</div>`
    : '';
  const reviews = (paper.reviews ?? []).map(
    (r) => `
      <li class="review">
        <span class="badge value">${r.value}</span>
        <span class="rater">${r.rater === null ? 'anonymous' : esc(r.rater)}</span>
        <p class="comment">${esc(r.comment)}</p>
      </li>`,
  );
  const reviewForm = sessionUserId
    ? `
      <form class="community-review" data-action="community-review" data-paper="${esc(paper.paper_id)}">
        <label>Rating <select name="value">${crOptions()}</select></label>
        <label>Comment (at least ${MIN_COMMENT_CHARS} characters)
          <textarea name="comment" rows="6" required></textarea></label>
        <span class="char-count" data-role="char-count">0/${MIN_COMMENT_CHARS}</span>
        <label class="inline"><input type="checkbox" name="public_name" checked> sign with my name</label>
        <button type="submit" disabled>Submit review</button>
      </form>`
    : `<p class="signin-hint">Sign in to add a community review.</p>`;
  return `
    <section class="paper">
      ${flag}
      <h2>${esc(paper.title)}</h2>
      <p class="authors">${(paper.authors ?? []).map(esc).join(', ')}</p>
      <p class="doi"><a href="https://doi.org/${esc(paper.doi ?? '')}">${esc(paper.doi ?? '')}</a></p>
      <div class="ratings">
        <span class="badge rr">RR ${formatRating(paper.rr)}</span>
        <span class="badge cr">CR ${formatRating(paper.cr)}</span>
        <span class="badge votes">${paper.cr_count ?? 0} community ratings</span>
      </div>
      ${history ? renderSparkline(history) : ''}
      <ul class="reviews">${reviews.join('')}</ul>
      ${reviewForm}
    </section>`;
}

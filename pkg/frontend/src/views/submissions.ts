import type { Account, NewSubmission } from '../api.js';
import { countdown, esc } from '../format.js';

function ratingOptions(min: number, max: number, cap: number | null = null): string {
  const top = cap === null ? max : Math.min(max, cap);
  const opts: string[] = [];
  for (let v = min; v <= top; v++) opts.push(`<option value="${v}">${v}</option>`);
  return opts.join('');
}

export function renderNewSubmissions(
  items: NewSubmission[],
  ownPaperIds: Set<string>,
  nowMs: number,
  signedIn: boolean,
): string {
  if (items.length === 0) {
    return `<section class="new-submissions"><p class="empty">No manuscripts in their editorial window.</p></section>`;
  }
  const rows = items.map((m) => {
    const cd = countdown(m.editorial_deadline, nowMs);
    const own = ownPaperIds.has(m.paper_id);
    // the rating widget never renders for the submitter's own manuscript;
    // anyone else may try, and the server decides eligibility
    const widget =
      !signedIn || own
        ? own
          ? `<span class="own">your submission</span>`
          : `<span class="signin-hint">sign in to rate</span>`
        : `
          <form class="rate-initial" data-action="initial-rating" data-paper="${esc(m.paper_id)}">
            <select name="value">${ratingOptions(1, 5)}</select>
            <button type="submit">Rate impact</button>
          </form>`;
    return `
      <li class="submission-row" data-paper="${esc(m.paper_id)}">
        <span class="title">${esc(m.title)}</span>
        <span class="authors">${m.authors === null ? 'authors concealed' : m.authors.map(esc).join(', ')}</span>
        <span class="badge iar">self-rated ${m.iar}</span>
        <span class="countdown ${cd.overdue ? 'overdue' : ''}">${cd.label}</span>
        <span class="keywords">${m.keywords.map(esc).join(', ')}</span>
        ${widget}
      </li>`;
  });
  return `<section class="new-submissions"><ul>${rows.join('')}</ul></section>`;
}

export function renderSubmissionForm(account: Account | null): string {
  if (account === null) {
    return `<section class="submission-form"><p class="signin-hint">Sign in to submit a manuscript.</p></section>`;
  }
  const left = account.quota.limit - account.quota.used;
  const capNote =
    account.iar_cap !== null
      ? `<p class="cap-note">Your self-rating is temporarily capped at ${account.iar_cap}.</p>`
      : '';
  return `
    <section class="submission-form">
      <h2>Submit a manuscript</h2>
      <p class="quota">${left} of ${account.quota.limit} uploads left in ${account.quota.year}.</p>
      ${capNote}
      <form data-action="submit-manuscript">
        <label>Title <input name="title" required maxlength="300"></label>
        <label>Keywords (one path per line, e.g. physics/cmp/layered)
          <textarea name="keywords" rows="3" required></textarea></label>
        <label>Self-assessed impact
          <select name="iar">${ratingOptions(1, 5, account.iar_cap)}</select></label>
        <label>Manuscript text <textarea name="content" rows="12" required></textarea></label>
        <label>Co-author ids (comma separated) <input name="co_authors"></label>
        <label>Referees to exclude <input name="excluded_referees"></label>
        <label>Referees to suggest <input name="suggested_referees"></label>
        <label class="inline"><input type="checkbox" name="anonymous_review"> review anonymously</label>
        <button type="submit">Submit for community evaluation</button>
      </form>
    </section>`;
}

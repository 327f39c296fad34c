import type { Invitation } from '../api.js';
import { countdown, esc } from '../format.js';

export const DEADLINE_MIN_DAYS = 14;
export const DEADLINE_MAX_DAYS = 28;

// Referee ratings share the 1..5 scale: zero exists only in community review.
function rrOptions(): string {
  return [1, 2, 3, 4, 5].map((v) => `<option value="${v}">${v}</option>`).join('');
}

function invitationControls(inv: Invitation, nowMs: number): string {
  if (inv.status === 'Invited') {
    return `
      <form class="respond" data-action="accept-invitation" data-paper="${esc(inv.paper_id)}">
        <label>Deadline (days)
          <input type="number" name="deadline_days" value="21"
                 min="${DEADLINE_MIN_DAYS}" max="${DEADLINE_MAX_DAYS}" required>
        </label>
        <button type="submit">Accept</button>
        <button type="button" data-action="decline-invitation" data-paper="${esc(inv.paper_id)}">Decline</button>
      </form>`;
  }
  if (inv.status === 'Accepted' && inv.declared_deadline) {
    const cd = countdown(inv.declared_deadline, nowMs);
    const risk = cd.overdue
      ? `<span class="badge at-risk">deadline passed</span>`
      : `<span class="countdown">${cd.label}</span>`;
    return `
      ${risk}
      <form class="report" data-action="file-report" data-paper="${esc(inv.paper_id)}">
        <label>Verdict
          <select name="verdict">
            <option>Accept</option>
            <option>MinorRevision</option>
            <option>Reject</option>
          </select></label>
        <label>Rating <select name="rating">${rrOptions()}</select></label>
        <label>Report <textarea name="text" rows="6"></textarea></label>
        <label class="inline"><input type="checkbox" name="structural_flaw"> serious structural flaw</label>
        <button type="submit">File report</button>
      </form>`;
  }
  if (inv.status === 'ExcludedLate') {
    return `<span class="badge excluded">excluded late</span>`;
  }
  return `<span class="badge status">${esc(inv.status.toLowerCase())}</span>`;
}

export function renderRefereeDashboard(invitations: Invitation[], nowMs: number): string {
  if (invitations.length === 0) {
    return `<section class="referee-dashboard"><p class="empty">No referee invitations.</p></section>`;
  }
  const rows = invitations.map((inv) => {
    const due = inv.declared_deadline
      ? `<span class="due">due ${esc(inv.declared_deadline.slice(0, 10))}</span>`
      : '';
    return `
      <li class="invitation" data-paper="${esc(inv.paper_id)}">
        <span class="title">${esc(inv.title)}</span>
        <span class="authors">${inv.authors === null ? 'authors anonymous' : inv.authors.map(esc).join(', ')}</span>
        <span class="round">round ${inv.round + 1}</span>
        ${due}
        ${invitationControls(inv, nowMs)}
      </li>`;
  });
  return `<section class="referee-dashboard"><ul>${rows.join('')}</ul></section>`;
}

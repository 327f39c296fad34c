import type { Account, LedgerView } from '../api.js';
import { esc } from '../format.js';

export function renderRewards(ledger: LedgerView | null, account: Account | null): string {
  if (ledger === null || account === null) {
    return `<section class="rewards"><p class="signin-hint">Sign in to see your reward points.</p></section>`;
  }
  const entries = ledger.entries
    .slice()
    .reverse()
    .map(
      (e) => `
      <tr>
        <td>${esc(e.at.slice(0, 10))}</td>
        <td>${esc(e.kind)}</td>
        <td class="delta">${e.points_delta >= 0 ? '+' : ''}${e.points_delta}</td>
        <td>${esc(e.reason)}</td>
        <td>${e.paper_id ? esc(e.paper_id) : ''}</td>
      </tr>`,
    );
  return `
    <section class="rewards">
      <h2>Reward points</h2>
      <p class="balance">Balance: <strong>${ledger.balance}</strong></p>
      <div class="spend">
        <form data-action="spend" data-spend="VisibilityBoost">
          <label>Boost one of your papers <input name="paper_id" placeholder="paper id" required></label>
          <button type="submit">Visibility boost (50)</button>
        </form>
        <form data-action="spend" data-spend="QuotaExtension">
          <button type="submit">Extra upload this year (100)</button>
        </form>
        <form data-action="spend" data-spend="CooldownReduction">
          <button type="submit">Shorten an active cooldown (100)</button>
        </form>
      </div>
      <table class="ledger">
        <thead><tr><th>date</th><th>kind</th><th>points</th><th>reason</th><th>paper</th></tr></thead>
        <tbody>${entries.join('')}</tbody>
      </table>
    </section>`;
}

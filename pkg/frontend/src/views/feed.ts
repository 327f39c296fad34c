import type { FeedPage } from '../api.js';
import { breadcrumb, esc, formatRating } from '../format.js';

export function renderBreadcrumb(path: string): string {
  const parts = breadcrumb(path).map(
    (c, i, all) =>
      i === all.length - 1
        ? `<span class="crumb current">${esc(c.label)}</span>`
        : `<a class="crumb" href="#/feed/${esc(c.path)}">${esc(c.label)}</a>`,
  );
  return `<nav class="breadcrumb">${parts.join(' / ')}</nav>`;
}

export function renderFeed(page: FeedPage): string {
  const rows = page.papers.map((p) => {
    const cr =
      p.cr === null
        ? `<span class="badge cr empty">CR —</span>`
        : `<span class="badge cr">CR ${formatRating(p.cr)}</span>`;
    const flag = p.red_flagged ? `<span class="badge red-flag">red flag</span>` : '';
    return `
      <li class="paper-row" data-paper="${esc(p.paper_id)}">
        <a href="#/papers/${esc(p.paper_id)}" class="title">${esc(p.title)}</a>
        <span class="authors">${p.authors.map(esc).join(', ')}</span>
        <span class="badge rr">RR ${formatRating(p.rr)}</span>
        ${cr}
        <span class="badge votes">${p.cr_count} community ratings</span>
        ${flag}
        <span class="doi">${esc(p.doi)}</span>
      </li>`;
  });
  const empty = `<p class="empty">No papers in this section yet.</p>`;
  const more = page.next_cursor
    ? `<button class="more" data-action="feed-more" data-cursor="${esc(page.next_cursor)}">More</button>`
    : '';
  return `
    <section class="feed">
      ${renderBreadcrumb(page.section)}
      ${page.papers.length === 0 ? empty : `<ul class="papers">${rows.join('')}</ul>`}
      ${more}
    </section>`;
}

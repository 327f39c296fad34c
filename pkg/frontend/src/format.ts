// Pure presentation helpers: escaping, countdowns, rating badges, sparklines.

export function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

export function formatRating(value: number | null | undefined): string {
  if (value === null || value === undefined) return '—';
  return (Math.round(value * 100) / 100).toFixed(2).replace(/\.?0+$/, '');
}

export interface Countdown {
  overdue: boolean;
  label: string;
}

export function countdown(deadlineIso: string, nowMs: number): Countdown {
  const remaining = Date.parse(deadlineIso) - nowMs;
  if (remaining <= 0) return { overdue: true, label: 'overdue' };
  const days = Math.floor(remaining / 86_400_000);
  const hours = Math.floor((remaining % 86_400_000) / 3_600_000);
  if (days > 0) return { overdue: false, label: `${days}d ${hours}h left` };
  const minutes = Math.floor((remaining % 3_600_000) / 60_000);
  if (hours > 0) return { overdue: false, label: `${hours}h ${minutes}m left` };
  return { overdue: false, label: `${minutes}m left` };
}

export function breadcrumb(path: string): Array<{ label: string; path: string }> {
  const crumbs = [{ label: 'all fields', path: '' }];
  const segments = path.split('/').filter((s) => s.length > 0);
  segments.forEach((segment, i) => {
    crumbs.push({ label: segment, path: segments.slice(0, i + 1).join('/') });
  });
  return crumbs;
}

// Maps a community-vote series onto SVG polyline points (viewbox 100x30,
// newest vote at the right edge, the 0..5 scale top to bottom).
export function sparklinePoints(values: number[], width = 100, height = 30): string {
  if (values.length === 0) return '';
  if (values.length === 1) return `0,${(height - (values[0]! / 5) * height).toFixed(1)}`;
  const step = width / (values.length - 1);
  return values
    .map((v, i) => `${(i * step).toFixed(1)},${(height - (v / 5) * height).toFixed(1)}`)
    .join(' ');
}

export function clampDeadline(days: number, min = 14, max = 28): number {
  return Math.min(max, Math.max(min, Math.round(days)));
}

export const MIN_COMMENT_CHARS = 200;

// Local usability check only; the server is authoritative.
export function commentLength(comment: string): number {
  return comment.split(/\s+/).filter((w) => w.length > 0).join(' ').length;
}

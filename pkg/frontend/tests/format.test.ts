import { describe, expect, it } from 'vitest';

import {
  breadcrumb,
  clampDeadline,
  commentLength,
  countdown,
  esc,
  formatRating,
  sparklinePoints,
} from '../src/format.js';

describe('countdown', () => {
  const now = Date.parse('2026-02-01T00:00:00Z');

  it('reports days and hours left', () => {
    expect(countdown('2026-02-04T06:00:00Z', now)).toEqual({ overdue: false, label: '3d 6h left' });
  });

  it('reports minutes under an hour', () => {
    expect(countdown('2026-02-01T00:45:00Z', now).label).toBe('45m left');
  });

  it('flags overdue deadlines', () => {
    expect(countdown('2026-01-31T23:00:00Z', now).overdue).toBe(true);
  });
});

describe('breadcrumb', () => {
  it('builds one crumb per path prefix, rooted at all fields', () => {
    expect(breadcrumb('physics/cmp/layered')).toEqual([
      { label: 'all fields', path: '' },
      { label: 'physics', path: 'physics' },
      { label: 'cmp', path: 'physics/cmp' },
      { label: 'layered', path: 'physics/cmp/layered' },
    ]);
  });

  it('root path is just the root crumb', () => {
    expect(breadcrumb('')).toEqual([{ label: 'all fields', path: '' }]);
  });
});

describe('sparklinePoints', () => {
  it('maps the 0..5 scale onto the viewbox top to bottom', () => {
    expect(sparklinePoints([5, 0], 100, 30)).toBe('0.0,0.0 100.0,30.0');
  });

  it('spaces votes evenly', () => {
    const points = sparklinePoints([3, 3, 3], 100, 30).split(' ');
    expect(points).toHaveLength(3);
    expect(points[1]!.startsWith('50.0,')).toBe(true);
  });

  it('handles empty and single-vote series', () => {
    expect(sparklinePoints([])).toBe('');
    expect(sparklinePoints([5])).toBe('0,0.0');
  });
});

describe('deadline and comments', () => {
  it('clamps deadlines to the 14-28 day window', () => {
    expect(clampDeadline(5)).toBe(14);
    expect(clampDeadline(21)).toBe(21);
    expect(clampDeadline(99)).toBe(28);
  });

  it('measures comments after whitespace collapse', () => {
    expect(commentLength('a   b\n\nc')).toBe(5);
    expect(commentLength('   ')).toBe(0);
  });
});

describe('esc / formatRating', () => {
  it('escapes markup', () => {
    expect(esc('<b>&"x"')).toBe('&lt;b&gt;&amp;&quot;x&quot;');
  });

  it('renders ratings compactly', () => {
    expect(formatRating(3.5)).toBe('3.5');
    expect(formatRating(4)).toBe('4');
    expect(formatRating(null)).toBe('—');
    expect(formatRating(4.256)).toBe('4.26');
  });
});

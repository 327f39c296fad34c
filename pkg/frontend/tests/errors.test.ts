import { describe, expect, it } from 'vitest';

import { ApiError } from '../src/api.js';
import { ERROR_RENDERINGS, renderError } from '../src/errors.js';

describe('error renderings', () => {
  it('gives every code exactly one rendering string', () => {
    const renderings = Object.values(ERROR_RENDERINGS);
    expect(new Set(renderings).size).toBe(renderings.length);
  });

  it('distinguishes WindowClosed from NotEligible', () => {
    const closed = renderError(new ApiError('WindowClosed', 'raw', 409));
    const ineligible = renderError(new ApiError('NotEligible', 'raw', 403));
    expect(closed).not.toBe(ineligible);
    expect(closed).toMatch(/window/i);
    expect(ineligible).toMatch(/expertise|overlap/i);
  });

  it('shows the UnknownSection server message verbatim', () => {
    const err = new ApiError('UnknownSection', "no section 'physics/underwater'", 404);
    expect(renderError(err)).toBe("no section 'physics/underwater'");
  });

  it('falls back to the server message for unmapped codes', () => {
    const err = new ApiError('BrandNewCode', 'server says so', 400);
    expect(renderError(err)).toBe('server says so');
  });

  it('covers the workflow codes the portal surfaces', () => {
    for (const code of [
      'QuotaExceeded', 'CooldownActive', 'NotEligible', 'WindowClosed',
      'DuplicateVote', 'AuthorSelfVote', 'NotAssigned', 'AlreadyReported',
      'InvalidDeadline', 'VoidComment', 'DuplicateRater', 'InsufficientPoints',
      'NoActiveCooldown', 'InvalidIdentity', 'DuplicateAccount',
    ]) {
      expect(ERROR_RENDERINGS[code], code).toBeTruthy();
    }
  });

  it('handles network-level failures without an ApiError', () => {
    expect(renderError(new TypeError('fetch failed'))).toMatch(/reached/i);
  });
});

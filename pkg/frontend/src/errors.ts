// One rendering per API error code. The portal never re-implements a gate:
// it sends the command and translates whatever code comes back.

import { ApiError } from './api.js';

export const ERROR_RENDERINGS: Record<string, string> = {
  QuotaExceeded: 'You have used all of your uploads for this year.',
  CooldownActive: 'A co-author is in a post-rejection waiting period; submission is blocked until it ends.',
  IarCapViolated: 'Your self-rating is temporarily capped; pick a lower impact rating.',
  UnverifiedIdentity: 'Your identity is not verified on this node.',
  NotEligible: 'Your declared expertise does not overlap this manuscript enough to rate it.',
  WindowClosed: 'The editorial window for this manuscript has closed.',
  DuplicateVote: 'You have already rated this manuscript.',
  AuthorSelfVote: 'Authors cannot rate their own work.',
  NotAssigned: 'You are not a referee on this manuscript.',
  AlreadyReported: 'You already filed a report for this round.',
  AlreadyResponded: 'You already answered this invitation.',
  InvalidDeadline: 'Pick a review deadline between 14 and 28 days.',
  VoidComment: 'Community reviews need a substantive comment (at least 200 characters).',
  DuplicateRater: 'You have already reviewed this paper; community ratings are permanent.',
  InsufficientPoints: 'Not enough reward points for that.',
  NoActiveCooldown: 'There is no active waiting period to shorten.',
  InvalidIdentity: 'Use an allow-listed institutional email or a valid ORCID iD.',
  DuplicateAccount: 'That identity is already registered.',
  UnknownPaper: 'No such paper on this node.',
  UnknownUser: 'No such user on this node.',
  Unauthorized: 'Sign in to continue.',
  Forbidden: 'Your session does not allow that.',
  InvalidState: 'That action does not apply to this manuscript right now.',
  OutOfScale: 'Ratings run from the bottom to the top of the 0-5 scale.',
  ZeroNotAllowedForKind: 'Zero is reserved for post-publication community ratings.',
};

// UnknownSection intentionally has no fixed rendering: the server's own
// message is shown verbatim.
const VERBATIM_CODES = new Set(['UnknownSection']);

export function renderError(err: unknown): string {
  if (err instanceof ApiError) {
    if (VERBATIM_CODES.has(err.code)) return err.message;
    return ERROR_RENDERINGS[err.code] ?? err.message;
  }
  return 'The node could not be reached. Try again.';
}

// End-to-end against a live node: register -> submit (IAR 4) -> a second user
// votes inside the editorial window -> window closes -> referees accept with
// 14-day deadlines -> file reports -> publication -> a community review with
// a 0 rating and a real comment is accepted. Every step goes through the
// portal's own API client; each transition is verified against server state.
//
// No browser binary exists in this environment, so the client layer stands in
// for the rendered portal; the views over these payloads are unit-tested.

import { spawn, type ChildProcess } from 'node:child_process';
import { mkdtempSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { PortalApi } from '../src/api.js';

const PORT = 8457;
const BASE = `http://127.0.0.1:${PORT}`;
const EDITORIAL_WINDOW_MS = 9000; // EDITORIAL_DAYS below encodes ~10.4 s

let server: ChildProcess | null = null;
let available = false;

async function waitForHealth(timeoutMs: number): Promise<boolean> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const res = await fetch(`${BASE}/healthz`);
      if (res.ok) return true;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 300));
  }
  return false;
}

beforeAll(async () => {
  server = spawn('scholarnode', ['serve', '--port', String(PORT)], {
    env: {
      ...process.env,
      NODE_ID: 'e2e',
      ALLOWED_EMAIL_DOMAINS: 'uni.example',
      DATA_DIR: mkdtempSync(join(tmpdir(), 'portal-e2e-')),
      OPERATOR_KEY: 'op-e2e',
      EDITORIAL_DAYS: '0.00012', // ~10.4 seconds
    },
    stdio: 'ignore',
  });
  server.on('error', () => {
    available = false;
  });
  available = await waitForHealth(15_000);
}, 30_000);

afterAll(() => {
  server?.kill();
});

describe('portal flow against a live node', () => {
  it(
    'runs submission through community review end to end',
    async (ctx) => {
      if (!available) {
        ctx.skip();
        return;
      }
      const ops = new PortalApi(BASE);
      const opSession = await fetch(`${BASE}/sessions`, {
        method: 'POST',
        headers: { 'content-type': 'application/json' },
        body: JSON.stringify({ operator_key: 'op-e2e' }),
      }).then((r) => r.json());

      async function user(identity: string, institution: string): Promise<PortalApi> {
        const api = new PortalApi(BASE);
        const account = await api.register(identity, ['physics/cmp/layered'], institution);
        const session = await api.createSession(account.user_id);
        api.setToken(session.token);
        return api;
      }

      const author = await user('author@uni.example', 'inst-author');
      const voter = await user('voter@uni.example', 'inst-voter');
      const referees: PortalApi[] = [];
      for (let i = 0; i < 5; i++) {
        referees.push(await user(`ref${i}@uni.example`, `inst-ref${i}`));
      }

      // submit with a self-assessed impact of 4
      const paper = await author.submitManuscript({
        title: 'Portal end to end',
        content: 'manuscript body',
        keywords: ['physics/cmp/layered'],
        iar: 4,
      });
      const pid = paper.paper_id;
      expect(paper.state).toBe('EditorialPeriod');

      // a second user votes inside the open window
      const listing = await voter.newSubmissions();
      expect(listing.submissions.map((s) => s.paper_id)).toContain(pid);
      await voter.castInitialRating(pid, 4);

      // let the window lapse, then the operator tick closes it
      await new Promise((r) => setTimeout(r, EDITORIAL_WINDOW_MS + 3000));
      await fetch(`${BASE}/operator/tick`, {
        method: 'POST',
        headers: { authorization: `Bearer ${opSession.token}` },
      });

      // every referee sees the invitation and accepts with a 14-day deadline
      const panels: PortalApi[] = [];
      for (const ref of referees) {
        const inv = await ref.invitations();
        if (inv.invitations.length === 0) continue;
        expect(inv.invitations[0]!.paper_id).toBe(pid);
        await ref.acceptInvitation(pid, 14);
        panels.push(ref);
      }
      expect(panels.length).toBeGreaterThanOrEqual(4);

      // four on-time reports reach the decision quorum
      const ratings = [2, 3, 4, 5];
      for (let i = 0; i < 4; i++) {
        await panels[i]!.fileReport(pid, 'Accept', ratings[i]!, 'looks right', false);
      }

      const published = await voter.paper(pid);
      expect(published.state).toBe('Published');
      expect(published.rr).toBe(3.5);
      expect(published.doi).toBe('10.9999/e2e.1');

      // a community review with the 0 rating and a non-void comment is accepted
      const comment =
        'Re-ran the fit against the shared dataset and the released scripts; ' +
        'the central claim does not reproduce within the stated uncertainty, ' +
        'the error analysis omits the dominant systematic entirely, and the ' +
        'control measurement in the appendix contradicts the main figure.';
      const review = await voter.communityReview(pid, 0, comment, true);
      expect(review.cr).toBe(0);
      expect(review.cr_count).toBe(1);

      const after = await author.paper(pid);
      expect(after.cr).toBe(0);
      const history = await voter.ratingsHistory(pid);
      expect(history.votes.map((v) => v.value)).toEqual([0]);
    },
    60_000,
  );
});

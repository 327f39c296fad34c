// Client view state. Commands are tracked through explicit acknowledgment:
// nothing is displayed as recorded until the server said so.

import type { Session } from './api.js';

export type View =
  | { kind: 'feed'; path: string }
  | { kind: 'new-submissions' }
  | { kind: 'submission-form' }
  | { kind: 'referee-dashboard' }
  | { kind: 'paper'; paperId: string }
  | { kind: 'rewards' };

export type CommandStatus = 'pending' | 'acknowledged' | 'failed';

export interface PendingCommand {
  id: number;
  label: string;
  status: CommandStatus;
  errorCode?: string;
}

export class ViewState {
  session: Session | null = null;
  view: View = { kind: 'feed', path: '' };
  commands: PendingCommand[] = [];
  private nextId = 1;

  begin(label: string): number {
    const id = this.nextId++;
    this.commands.push({ id, label, status: 'pending' });
    return id;
  }

  acknowledge(id: number): void {
    const cmd = this.find(id);
    if (cmd) cmd.status = 'acknowledged';
  }

  fail(id: number, errorCode: string): void {
    const cmd = this.find(id);
    if (cmd) {
      cmd.status = 'failed';
      cmd.errorCode = errorCode;
    }
  }

  isRecorded(id: number): boolean {
    return this.find(id)?.status === 'acknowledged';
  }

  inFlight(): PendingCommand[] {
    return this.commands.filter((c) => c.status === 'pending');
  }

  private find(id: number): PendingCommand | undefined {
    return this.commands.find((c) => c.id === id);
  }
}

// Runs one server command under acknowledgment discipline and reports the
// outcome; the caller re-renders from fetched state either way.
export async function runCommand<T>(
  state: ViewState,
  label: string,
  action: () => Promise<T>,
): Promise<{ ok: true; value: T; id: number } | { ok: false; error: unknown; id: number }> {
  const id = state.begin(label);
  try {
    const value = await action();
    state.acknowledge(id);
    return { ok: true, value, id };
  } catch (error) {
    const code = (error as { code?: string }).code ?? 'Internal';
    state.fail(id, code);
    return { ok: false, error, id };
  }
}

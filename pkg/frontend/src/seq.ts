/** Stale-response discarding via monotonically increasing sequence numbers.
 *
 * Each endpoint category owns one gate. Issuing a request takes a ticket;
 * a response may be applied only if its ticket is newer than everything
 * already applied, so answers delivered out of order are dropped instead
 * of overwriting fresher state.
 */
export class LatestGate {
  private issued = 0;
  private applied = 0;

  /** Take the sequence number for a request about to be sent. */
  issue(): number {
    this.issued += 1;
    return this.issued;
  }

  /** True (and records it) iff a response with this ticket is still fresh. */
  accept(seq: number): boolean {
    if (seq <= this.applied) {
      return false;
    }
    this.applied = seq;
    return true;
  }

  /** Sequence number of the newest response applied so far. */
  get latestApplied(): number {
    return this.applied;
  }
}

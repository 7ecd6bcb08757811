import { ApiClient, ApiError } from './api'
import type { CandidateCard, CandidateFilter, Verdict } from './types'

export const KEY_BINDINGS: Record<string, Verdict | 'skip'> = {
  v: 'valid',
  i: 'invalid',
  d: 'discuss',
  s: 'skip',
}

export interface QueueCard extends CandidateCard {
  /** verdict rendered optimistically, awaiting (or lacking) server ack */
  myVerdict?: Verdict
  pending: boolean
  conflict: boolean
}

export interface OutboxEntry {
  term: string
  verdict: Verdict
  comment: string
}

export interface QueueEvents {
  onChange?: () => void
  onConflict?: (card: QueueCard) => void
}

/**
 * Keyboard triage over the candidate queue.
 *
 * Decisions render optimistically and are reconciled against the server's
 * acknowledgment. Network failures park the decision in an outbox (the
 * card keeps a visible pending badge) for retry; server-side rejections
 * refresh the card and hand it back for a new prompt, so the journal only
 * ever contains verdicts the coder actually confirmed.
 */
export class TriageQueue {
  cards: QueueCard[] = []
  cursor = 0
  outbox: OutboxEntry[] = []
  round = 1
  total = 0

  constructor(
    private client: ApiClient,
    public coderId: string,
    private events: QueueEvents = {},
  ) {}

  private notify(): void {
    this.events.onChange?.()
  }

  async load(filter: CandidateFilter = {}): Promise<void> {
    const page = await this.client.candidates({ page_size: 200, ...filter })
    this.cards = page.items.map((item) => ({
      ...item,
      myVerdict: (item.verdicts[this.coderId] as Verdict | undefined) ?? undefined,
      pending: false,
      conflict: false,
    }))
    this.total = page.total
    if (this.cards.length > 0) this.round = this.cards[0].round
    this.cursor = 0
    this.notify()
  }

  get current(): QueueCard | undefined {
    return this.cards[this.cursor]
  }

  get pendingCount(): number {
    return this.outbox.length
  }

  get undecidedCount(): number {
    return this.cards.filter((c) => c.myVerdict === undefined).length
  }

  advance(): void {
    if (this.cursor < this.cards.length) this.cursor += 1
    this.notify()
  }

  /** Handle a triage keystroke against the current card. */
  async handleKey(key: string, comment = ''): Promise<void> {
    const action = KEY_BINDINGS[key.toLowerCase()]
    const card = this.current
    if (!action || !card) return
    if (action === 'skip') {
      this.advance()
      return
    }
    await this.decide(card, action, comment)
  }

  async decide(card: QueueCard, verdict: Verdict, comment = ''): Promise<void> {
    card.myVerdict = verdict // optimistic
    card.pending = true
    this.advance()
    try {
      const acked = await this.client.postDecision(card.term, this.coderId, this.round, verdict, comment)
      this.reconcile(card, acked)
    } catch (err) {
      if (err instanceof ApiError) {
        // server rejected it (closed round, unknown term, stale state):
        // drop the optimistic verdict and hand the card back
        card.myVerdict = undefined
        card.pending = false
        card.conflict = true
        await this.refreshCard(card)
        this.events.onConflict?.(card)
        this.notify()
      } else {
        // network failure: keep the pending badge and park for retry
        this.outbox.push({ term: card.term, verdict, comment })
        this.notify()
      }
    }
  }

  private reconcile(card: QueueCard, acked: CandidateCard): void {
    card.pending = false
    card.conflict = false
    card.status = acked.status
    card.verdicts = acked.verdicts
    card.comments = acked.comments
    card.myVerdict = (acked.verdicts[this.coderId] as Verdict | undefined) ?? card.myVerdict
    this.notify()
  }

  private async refreshCard(card: QueueCard): Promise<void> {
    try {
      const page = await this.client.candidates({ q: card.term, page_size: 200 })
      const fresh = page.items.find((item) => item.term === card.term)
      if (fresh) {
        card.status = fresh.status
        card.verdicts = fresh.verdicts
        card.comments = fresh.comments
        card.round = fresh.round
        this.round = fresh.round
      }
    } catch {
      // offline: leave the stale card; the next successful call refreshes it
    }
  }

  /** Re-send parked decisions; entries that fail again stay parked. */
  async retryOutbox(): Promise<number> {
    const parked = this.outbox
    this.outbox = []
    let sent = 0
    for (const entry of parked) {
      const card = this.cards.find((c) => c.term === entry.term)
      try {
        const acked = await this.client.postDecision(
          entry.term,
          this.coderId,
          this.round,
          entry.verdict,
          entry.comment,
        )
        sent += 1
        if (card) this.reconcile(card, acked)
      } catch (err) {
        if (err instanceof ApiError) {
          if (card) {
            card.myVerdict = undefined
            card.pending = false
            card.conflict = true
            this.events.onConflict?.(card)
          }
        } else {
          this.outbox.push(entry)
        }
      }
    }
    this.notify()
    return sent
  }
}

import { ApiClient } from './api'
import type { LabelingSnapshot } from './types'

export const MIN_LABELS = 1
export const MAX_LABELS = 8

export class LabelRuleError extends Error {}

/**
 * Chip-editor state for one form's type labels.
 *
 * The 1..8 bound and the type universe are enforced before anything is
 * sent, so an invalid edit never reaches the server.
 */
export class LabelEditor {
  labels: string[]
  dirty = false

  constructor(
    public term: string,
    initial: string[],
    public universe: string[] | null,
  ) {
    this.labels = [...initial]
  }

  get canAdd(): boolean {
    return this.labels.length < MAX_LABELS
  }

  get canRemove(): boolean {
    return this.labels.length > MIN_LABELS
  }

  add(label: string): void {
    if (this.labels.includes(label)) {
      throw new LabelRuleError(`label ${label} already present`)
    }
    if (this.labels.length >= MAX_LABELS) {
      throw new LabelRuleError(`a form carries at most ${MAX_LABELS} types`)
    }
    if (this.universe && !this.universe.includes(label)) {
      throw new LabelRuleError(`unknown type ${label}`)
    }
    this.labels.push(label)
    this.dirty = true
  }

  remove(label: string): void {
    const index = this.labels.indexOf(label)
    if (index < 0) return
    if (this.labels.length <= MIN_LABELS) {
      throw new LabelRuleError(`a form carries at least ${MIN_LABELS} type`)
    }
    this.labels.splice(index, 1)
    this.dirty = true
  }

  async save(client: ApiClient): Promise<void> {
    if (this.labels.length < MIN_LABELS || this.labels.length > MAX_LABELS) {
      throw new LabelRuleError(`a form carries ${MIN_LABELS}..${MAX_LABELS} types`)
    }
    await client.setLabels(this.term, this.labels)
    this.dirty = false
  }
}

export interface LabelBoardRow {
  term: string
  labels: string[]
  isDefault: boolean
}

/** Rows for the label editor list: saved assignments + cluster-suggested defaults. */
export function buildLabelBoard(
  snapshot: LabelingSnapshot,
  clusterDefaults: Record<string, string[]> = {},
): LabelBoardRow[] {
  const rows: LabelBoardRow[] = []
  const seen = new Set<string>()
  for (const [term, labels] of Object.entries(snapshot.forms)) {
    rows.push({ term, labels, isDefault: false })
    seen.add(term)
  }
  for (const [term, labels] of Object.entries(clusterDefaults)) {
    if (!seen.has(term)) rows.push({ term, labels, isDefault: true })
  }
  rows.sort((a, b) => a.term.localeCompare(b.term))
  return rows
}

import type { DiscrepancyItem, Progress, ResolutionVerdict } from './types'

export interface CoderRow {
  coder: string
  decided: number
  share: number // fraction of the candidate universe this coder has covered
}

export interface DashboardModel {
  openRound: number
  codebookVersion: number
  nCandidates: number
  coders: CoderRow[]
  statusCounts: { status: string; count: number }[]
  discrepancies: DiscrepancyItem[]
}

export function buildDashboard(progress: Progress, discrepancies: DiscrepancyItem[]): DashboardModel {
  const coders = Object.entries(progress.per_coder)
    .map(([coder, decided]) => ({
      coder,
      decided,
      share: progress.n_candidates > 0 ? decided / progress.n_candidates : 0,
    }))
    .sort((a, b) => b.decided - a.decided || a.coder.localeCompare(b.coder))
  const statusCounts = Object.entries(progress.per_status)
    .map(([status, count]) => ({ status, count }))
    .sort((a, b) => a.status.localeCompare(b.status))
  return {
    openRound: progress.open_round,
    codebookVersion: progress.codebook_version,
    nCandidates: progress.n_candidates,
    coders,
    statusCounts,
    discrepancies,
  }
}

/** Form state for closing a round: every discrepancy gets a resolution or an explicit deferral. */
export class RoundResolutionForm {
  choices = new Map<string, { verdict: ResolutionVerdict; note: string }>()

  constructor(public discrepancies: DiscrepancyItem[]) {
    for (const item of discrepancies) {
      this.choices.set(item.term, { verdict: 'defer', note: '' })
    }
  }

  set(term: string, verdict: ResolutionVerdict, note = ''): void {
    if (!this.choices.has(term)) {
      throw new Error(`unknown discrepancy term ${term}`)
    }
    this.choices.set(term, { verdict, note })
  }

  get complete(): boolean {
    return this.discrepancies.every((d) => this.choices.has(d.term))
  }

  payload(): { term: string; verdict: ResolutionVerdict; note: string }[] {
    return [...this.choices.entries()].map(([term, choice]) => ({
      term,
      verdict: choice.verdict,
      note: choice.note,
    }))
  }
}

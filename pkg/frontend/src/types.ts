export type Verdict = 'valid' | 'invalid' | 'discuss'
export type ResolutionVerdict = 'valid' | 'invalid' | 'defer'
export type Status = 'valid' | 'invalid' | 'unresolved' | 'undecided'

export interface Context {
  doc_id: string
  year: number
  title: string
}

export interface CandidateCard {
  term: string
  arity: number
  n_docs: number
  n_occurrences: number
  first_year: number | null
  status: Status
  verdicts: Record<string, string>
  comments: Record<string, string>
  round: number
  contexts: Context[]
}

export interface CandidatePage {
  items: CandidateCard[]
  total: number
  page: number
  page_size: number
  n_pages: number
}

export interface DiscrepancyItem {
  term: string
  verdicts: Record<string, string>
}

export interface Progress {
  open_round: number
  codebook_version: number
  n_candidates: number
  per_coder: Record<string, number>
  per_status: Record<Status, number>
  n_discrepancies: number
}

export interface LabelingSnapshot {
  forms: Record<string, string[]>
  universe: string[] | null
  bounds: { min: number; max: number }
}

export interface CandidateFilter {
  status?: Status | ''
  arity?: 2 | 3 | ''
  q?: string
  page?: number
  page_size?: number
}

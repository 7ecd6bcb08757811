import type {
  CandidateCard,
  CandidateFilter,
  CandidatePage,
  DiscrepancyItem,
  LabelingSnapshot,
  Progress,
  ResolutionVerdict,
  Verdict,
} from './types'

export class ApiError extends Error {
  constructor(
    public status: number,
    public error: string,
    public detail: string,
  ) {
    super(`${error}: ${detail}`)
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>

export interface ApiOptions {
  token?: string
  fetchFn?: FetchLike
}

/** Thin typed client over the serve-mode HTTP JSON API. */
export class ApiClient {
  private fetchFn: FetchLike

  constructor(
    public baseUrl: string,
    private options: ApiOptions = {},
  ) {
    this.fetchFn = options.fetchFn ?? ((input, init) => fetch(input, init))
  }

  private headers(): Record<string, string> {
    const headers: Record<string, string> = { 'Content-Type': 'application/json' }
    if (this.options.token) headers['X-Auth-Token'] = this.options.token
    return headers
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      ...init,
      headers: { ...this.headers(), ...(init?.headers ?? {}) },
    })
    const body = await response.json().catch(() => ({}))
    if (!response.ok) {
      throw new ApiError(response.status, body.error ?? 'error', body.detail ?? '')
    }
    return body as T
  }

  health(): Promise<{ status: string; version: string }> {
    return this.request('/health')
  }

  candidates(filter: CandidateFilter = {}): Promise<CandidatePage> {
    const params = new URLSearchParams()
    if (filter.status) params.set('status', filter.status)
    if (filter.arity) params.set('arity', String(filter.arity))
    if (filter.q) params.set('q', filter.q)
    if (filter.page) params.set('page', String(filter.page))
    if (filter.page_size) params.set('page_size', String(filter.page_size))
    const query = params.toString()
    return this.request(`/candidates${query ? '?' + query : ''}`)
  }

  async postDecision(
    term: string,
    coderId: string,
    round: number,
    verdict: Verdict,
    comment = '',
  ): Promise<CandidateCard> {
    const body = await this.request<{ ok: boolean; candidate: CandidateCard }>('/decisions', {
      method: 'POST',
      body: JSON.stringify({ term, coder_id: coderId, round, verdict, comment }),
    })
    return body.candidate
  }

  async discrepancies(): Promise<DiscrepancyItem[]> {
    const body = await this.request<{ items: DiscrepancyItem[] }>('/discrepancies')
    return body.items
  }

  resolveRound(
    resolutions: { term: string; verdict: ResolutionVerdict; note?: string }[],
  ): Promise<{ ok: boolean; version: number; open_round: number }> {
    return this.request('/rounds/resolve', {
      method: 'POST',
      body: JSON.stringify({ resolutions }),
    })
  }

  progress(): Promise<Progress> {
    return this.request('/progress')
  }

  labeling(): Promise<LabelingSnapshot> {
    return this.request('/labeling')
  }

  setLabels(term: string, labels: string[]): Promise<{ ok: boolean }> {
    return this.request('/labeling', {
      method: 'POST',
      body: JSON.stringify({ term, labels }),
    })
  }
}

import { ApiClient } from './api'
import { buildDashboard, RoundResolutionForm } from './dashboard'
import { LabelEditor, LabelRuleError } from './labels'
import { KEY_BINDINGS, TriageQueue } from './queue'
import type { CandidateFilter, Status } from './types'

const coderId = localStorage.getItem('coder_id') ?? promptForCoder()
const token = localStorage.getItem('api_token') ?? undefined
const client = new ApiClient('', { token })
const queue = new TriageQueue(client, coderId, { onChange: render, onConflict: renderConflict })

let view: 'triage' | 'dashboard' | 'labels' = 'triage'
const filter: CandidateFilter = { status: 'undecided' }

function promptForCoder(): string {
  const value = window.prompt('coder id?') || 'anonymous'
  localStorage.setItem('coder_id', value)
  return value
}

function el(tag: string, cls: string, text = ''): HTMLElement {
  const node = document.createElement(tag)
  node.className = cls
  if (text) node.textContent = text
  return node
}

function render(): void {
  const root = document.getElementById('app')
  if (!root) return
  root.textContent = ''
  root.appendChild(renderNav())
  if (view === 'triage') root.appendChild(renderTriage())
  else if (view === 'dashboard') void renderDashboard(root)
  else void renderLabels(root)
}

function renderNav(): HTMLElement {
  const nav = el('nav', 'nav')
  for (const name of ['triage', 'dashboard', 'labels'] as const) {
    const button = el('button', view === name ? 'tab active' : 'tab', name)
    button.addEventListener('click', () => {
      view = name
      render()
    })
    nav.appendChild(button)
  }
  const badge = el('span', 'pending-badge', queue.pendingCount ? `${queue.pendingCount} pending` : '')
  nav.appendChild(badge)
  nav.appendChild(el('span', 'coder', `coder: ${coderId}`))
  return nav
}

function renderTriage(): HTMLElement {
  const pane = el('section', 'triage')
  const card = queue.current
  const controls = el('div', 'filters')
  const statusSelect = document.createElement('select')
  for (const status of ['', 'undecided', 'unresolved', 'valid', 'invalid'] as const) {
    const option = document.createElement('option')
    option.value = status
    option.textContent = status || 'all statuses'
    if (filter.status === status) option.selected = true
    statusSelect.appendChild(option)
  }
  statusSelect.addEventListener('change', () => {
    filter.status = statusSelect.value as Status | ''
    void queue.load(filter)
  })
  const aritySelect = document.createElement('select')
  for (const [value, label] of [['', 'any arity'], ['2', 'bigrams'], ['3', 'trigrams']] as const) {
    const option = document.createElement('option')
    option.value = value
    option.textContent = label
    if (String(filter.arity ?? '') === value) option.selected = true
    aritySelect.appendChild(option)
  }
  aritySelect.addEventListener('change', () => {
    filter.arity = aritySelect.value ? (Number(aritySelect.value) as 2 | 3) : ''
    void queue.load(filter)
  })
  const search = document.createElement('input')
  search.placeholder = 'search terms'
  search.value = filter.q ?? ''
  search.addEventListener('change', () => {
    filter.q = search.value
    void queue.load(filter)
  })
  controls.append(statusSelect, aritySelect, search)
  pane.appendChild(controls)

  if (!card) {
    pane.appendChild(el('p', 'done', 'queue finished - switch filters or resolve the round'))
    return pane
  }
  const box = el('article', 'card' + (card.pending ? ' pending' : '') + (card.conflict ? ' conflict' : ''))
  box.appendChild(el('h2', 'term', card.term))
  box.appendChild(
    el('p', 'meta', `${card.arity === 2 ? 'bigram' : 'trigram'} | ${card.n_docs} docs | ` +
      `${card.n_occurrences} occurrences | first ${card.first_year ?? '?'} | round ${card.round}`),
  )
  if (card.pending) box.appendChild(el('p', 'badge', 'pending sync'))
  if (card.conflict) box.appendChild(el('p', 'badge conflict', 'server state changed - please re-verdict'))
  const verdicts = el('ul', 'verdicts')
  for (const [coder, verdict] of Object.entries(card.verdicts)) {
    verdicts.appendChild(el('li', `verdict ${verdict}`, `${coder}: ${verdict}`))
  }
  box.appendChild(verdicts)
  const contexts = el('ul', 'contexts')
  for (const context of card.contexts) {
    contexts.appendChild(el('li', 'context', `${context.year} - ${context.title} (${context.doc_id})`))
  }
  box.appendChild(contexts)
  box.appendChild(el('p', 'keys', '[v]alid  [i]nvalid  [d]iscuss  [s]kip'))
  pane.appendChild(box)
  pane.appendChild(el('p', 'progress', `${queue.undecidedCount} undecided of ${queue.cards.length} loaded (${queue.total} total)`))
  return pane
}

function renderConflict(): void {
  render()
}

async function renderDashboard(root: HTMLElement): Promise<void> {
  const [progress, discrepancies] = await Promise.all([client.progress(), client.discrepancies()])
  const model = buildDashboard(progress, discrepancies)
  const pane = el('section', 'dashboard')
  pane.appendChild(el('h2', '', `round ${model.openRound} | codebook v${model.codebookVersion}`))
  const coders = el('ul', 'coders')
  for (const row of model.coders) {
    coders.appendChild(el('li', '', `${row.coder}: ${row.decided} (${Math.round(row.share * 100)}%)`))
  }
  pane.appendChild(coders)
  const statuses = el('ul', 'statuses')
  for (const row of model.statusCounts) {
    statuses.appendChild(el('li', '', `${row.status}: ${row.count}`))
  }
  pane.appendChild(statuses)
  pane.appendChild(el('h3', '', `discrepancies (${model.discrepancies.length})`))
  const form = new RoundResolutionForm(model.discrepancies)
  const list = el('ul', 'discrepancies')
  for (const item of model.discrepancies) {
    const li = el('li', 'discrepancy')
    const jump = el('button', 'jump', item.term)
    jump.addEventListener('click', () => {
      view = 'triage'
      filter.q = item.term
      filter.status = ''
      void queue.load(filter)
      render()
    })
    li.appendChild(jump)
    li.appendChild(el('span', '', ' ' + JSON.stringify(item.verdicts) + ' '))
    const select = document.createElement('select')
    for (const verdict of ['defer', 'valid', 'invalid'] as const) {
      const option = document.createElement('option')
      option.value = verdict
      option.textContent = verdict
      select.appendChild(option)
    }
    select.addEventListener('change', () => form.set(item.term, select.value as never))
    li.appendChild(select)
    list.appendChild(li)
  }
  pane.appendChild(list)
  // the resolution form belongs to the session marked as moderator
  if (localStorage.getItem('moderator') === '1') {
    const resolve = el('button', 'resolve', 'close round')
    resolve.addEventListener('click', async () => {
      await client.resolveRound(form.payload())
      await renderDashboard(root)
    })
    pane.appendChild(resolve)
  } else {
    pane.appendChild(el('p', 'hint', 'round resolution is available to the moderator session'))
  }
  root.appendChild(pane)
}

async function renderLabels(root: HTMLElement): Promise<void> {
  const snapshot = await client.labeling()
  const pane = el('section', 'labels')
  pane.appendChild(el('h2', '', `type labels (${Object.keys(snapshot.forms).length} forms labeled)`))
  for (const [term, labels] of Object.entries(snapshot.forms)) {
    const editor = new LabelEditor(term, labels, snapshot.universe)
    const row = el('div', 'label-row')
    row.appendChild(el('span', 'term', term))
    const chips = el('span', 'chips')
    const redraw = () => {
      chips.textContent = ''
      for (const label of editor.labels) {
        const chip = el('button', 'chip', label + ' x')
        chip.addEventListener('click', async () => {
          try {
            editor.remove(label)
            await editor.save(client)
            redraw()
          } catch (err) {
            if (err instanceof LabelRuleError) window.alert(err.message)
          }
        })
        chips.appendChild(chip)
      }
    }
    redraw()
    row.appendChild(chips)
    const adder = document.createElement('input')
    adder.placeholder = editor.canAdd ? 'add type' : 'at 8-label maximum'
    adder.disabled = !editor.canAdd
    adder.addEventListener('change', async () => {
      try {
        editor.add(adder.value.trim())
        await editor.save(client)
        adder.value = ''
        redraw()
      } catch (err) {
        if (err instanceof LabelRuleError) window.alert(err.message)
      }
    })
    row.appendChild(adder)
    pane.appendChild(row)
  }
  root.appendChild(pane)
}

document.addEventListener('keydown', (event) => {
  if (view !== 'triage') return
  const target = event.target as HTMLElement
  if (target.tagName === 'INPUT' || target.tagName === 'SELECT') return
  if (event.key.toLowerCase() in KEY_BINDINGS) {
    void queue.handleKey(event.key)
  }
})

window.addEventListener('online', () => void queue.retryOutbox())
window.setInterval(() => {
  if (queue.pendingCount > 0) void queue.retryOutbox()
}, 10000)

void queue.load(filter).then(render)

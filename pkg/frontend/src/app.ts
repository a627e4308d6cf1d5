// Experiment console: live movement characterization with a mouse, then
// typing trials on the generated personalized keyboard.
//
// Two-step trial flow: the prompt appears with keyboard letters hidden, a
// second confirmation reveals the letters and starts timing. Mistakes are
// not retried during typing (participants continue without interruption);
// only the characterization task has unlimited retries, handled server-side.

import { ApiClient, KeyDoc, LayoutDoc, Progress, TrialReport } from "./api.js"
import { SessionDriver } from "./driver.js"
import { buildGrid, hexOutline, Key, nearestKey } from "./hex.js"

const KEY_WIDTH = 130
const GRID_ROWS = 9
const GRID_COLS = 9
const PROMPTS = [
  "my watch fell in the water",
  "the children are playing outside",
  "please bring me a glass of water",
  "the train arrives at seven",
  "a cold wind blew from the north",
  "call me when you get home",
  "the museum is closed on monday",
  "warm bread with butter is the best",
]

type Phase = "idle" | "characterizing" | "generating" | "typing"

function clickBeep(): void {
  try {
    const ctx = new AudioContext()
    const osc = ctx.createOscillator()
    const gain = ctx.createGain()
    osc.frequency.value = 880
    gain.gain.setValueAtTime(0.08, ctx.currentTime)
    gain.gain.exponentialRampToValueAtTime(1e-4, ctx.currentTime + 0.08)
    osc.connect(gain).connect(ctx.destination)
    osc.start()
    osc.stop(ctx.currentTime + 0.09)
  } catch {
    // audio is feedback only; never let it break the task
  }
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag)
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v)
  if (text) node.textContent = text
  return node
}

export class App {
  private api = new ApiClient()
  private phase: Phase = "idle"
  private sessionId: string | null = null
  private driver: SessionDriver | null = null
  private target: KeyDoc | null = null
  private progress: Progress | null = null
  private sessionStart = 0
  private pauseStart: number | null = null
  private layout: LayoutDoc | null = null
  private layoutId: string | null = null
  private qwertyId: string | null = null
  private qwertyLayout: LayoutDoc | null = null
  private reports: TrialReport[] = []
  private banner = ""

  // typing state
  private prompt = ""
  private promptIndex = 0
  private typed = ""
  private typedPointer = 0
  private trialId: string | null = null
  private trialLayout: LayoutDoc | null = null
  private revealed = false
  private trialStart = 0

  constructor(private root: HTMLElement) {
    this.render()
  }

  private now(): number {
    return (performance.now() - this.sessionStart) / 1000
  }

  private async startCharacterization(seed: number): Promise<void> {
    const created = await this.api.createSession(seed)
    this.sessionId = created.session_id
    this.target = created.first_target
    this.progress = created.progress
    this.sessionStart = performance.now()
    this.driver = new SessionDriver(this.api, created.session_id, {
      onError: () => {
        this.banner = "network hiccup, retrying click"
        this.render()
      },
    })
    this.phase = "characterizing"
    this.render()
  }

  private async handleGridClick(evt: MouseEvent, svg: SVGSVGElement, keys: Key[]): Promise<void> {
    if (!this.driver || !this.target || this.pauseStart !== null) return
    const rect = svg.getBoundingClientRect()
    const x = evt.clientX - rect.left - KEY_WIDTH
    const y = evt.clientY - rect.top - KEY_WIDTH
    const key = nearestKey(keys, x, y)
    clickBeep()
    const response = await this.driver.submit({ clicked_key: { row: key.row, col: key.col }, t: this.now() })
    this.banner = response.success ? "" : "missed, same target stays highlighted"
    this.target = response.next_target
    this.progress = response.progress
    if (this.target === null) {
      await this.generateLayout()
      return
    }
    this.render()
  }

  private async generateLayout(): Promise<void> {
    this.phase = "generating"
    this.render()
    const result = await this.api.generateLayout("personalized", this.sessionId, 1)
    this.layout = result.layout
    this.layoutId = result.layout_id
    this.phase = "typing"
    this.render()
  }

  private async togglePause(): Promise<void> {
    if (!this.sessionId) return
    if (this.pauseStart === null) {
      this.pauseStart = this.now()
    } else {
      await this.api.postPause(this.sessionId, this.pauseStart, this.now())
      this.pauseStart = null
    }
    this.render()
  }

  private async beginTrial(layoutId: string, layout: LayoutDoc, reusePrompt = false): Promise<void> {
    if (!reusePrompt) {
      this.prompt = PROMPTS[this.promptIndex % PROMPTS.length]
      this.promptIndex += 1
    }
    const trial = await this.api.startTrial(layoutId, this.prompt)
    this.trialId = trial.trial_id
    this.prompt = trial.prompt
    this.trialLayout = layout
    this.typed = ""
    this.typedPointer = 0
    this.revealed = false
    this.render()
  }

  private reveal(): void {
    this.revealed = true
    this.trialStart = performance.now()
    this.render()
  }

  private async handleKeyboardClick(evt: MouseEvent, svg: SVGSVGElement, keys: { key: Key; char: string }[]): Promise<void> {
    if (!this.trialId || !this.revealed || this.typedPointer >= this.prompt.length) return
    const rect = svg.getBoundingClientRect()
    const x = evt.clientX - rect.left - KEY_WIDTH
    const y = evt.clientY - rect.top - KEY_WIDTH
    const nearest = nearestKey(keys.map((k) => k.key), x, y)
    const entry = keys.find((k) => k.key === nearest)
    if (!entry) return
    clickBeep()
    const t = (performance.now() - this.trialStart) / 1000
    const targetChar = this.prompt[this.typedPointer]
    await this.api.postKeystroke(this.trialId, targetChar, entry.char, Math.max(t, 1e-3))
    this.typed += entry.char
    this.typedPointer += 1
    this.render()
  }

  private async finishTrial(): Promise<void> {
    if (!this.trialId) return
    const report = await this.api.finishTrial(this.trialId)
    this.reports.push(report)
    this.trialId = null
    this.render()
  }

  private async compareOnQwerty(): Promise<void> {
    if (this.qwertyId === null) {
      const result = await this.api.generateLayout("qwerty", null, 0)
      this.qwertyId = result.layout_id
      this.qwertyLayout = result.layout
    }
    await this.beginTrial(this.qwertyId, this.qwertyLayout as LayoutDoc, true)
  }

  // rendering ----------------------------------------------------------

  private render(): void {
    this.root.replaceChildren()
    if (this.banner) {
      this.root.appendChild(el("div", { class: "banner" }, this.banner))
    }
    if (this.phase === "idle") this.renderIdle()
    else if (this.phase === "characterizing") this.renderCharacterization()
    else if (this.phase === "generating") {
      this.root.appendChild(el("h2", {}, "generating your keyboard"))
      this.root.appendChild(el("p", {}, "solving the assignment problem from your movement model"))
    } else this.renderTyping()
  }

  private renderIdle(): void {
    this.root.appendChild(el("h1", {}, "keyfitts"))
    this.root.appendChild(
      el(
        "p",
        {},
        "Click the highlighted hexagons as they appear. The task measures how you move in every direction and takes under 20 minutes.",
      ),
    )
    const seed = el("input", { type: "number", value: String(Math.floor(Math.random() * 100000)) })
    const button = el("button", {}, "start characterization")
    button.onclick = () => void this.startCharacterization(Number(seed.value))
    const controls = el("div", { class: "controls" })
    controls.append("seed: ", seed, button)
    this.root.appendChild(controls)
  }

  private renderProgressBar(): HTMLElement {
    const box = el("div", { class: "progress" })
    if (this.progress) {
      const { presented, cap, per_bin_r2 } = this.progress
      box.appendChild(el("span", {}, `targets: ${presented}/${cap}`))
      const badges = el("span", { class: "badges" })
      per_bin_r2.forEach((r2, i) => {
        const cls = r2 === null ? "badge unknown" : r2 > 0.25 ? "badge good" : "badge weak"
        const badge = el("span", { class: cls, title: `bin ${i}: ${r2 === null ? "n/a" : r2.toFixed(2)}` })
        badges.appendChild(badge)
      })
      box.appendChild(badges)
    }
    return box
  }

  private renderCharacterization(): void {
    this.root.appendChild(el("h2", {}, this.pauseStart === null ? "select the highlighted key" : "paused"))
    this.root.appendChild(this.renderProgressBar())
    const pause = el("button", {}, this.pauseStart === null ? "pause" : "resume")
    pause.onclick = () => void this.togglePause()
    this.root.appendChild(pause)

    const keys = buildGrid(GRID_ROWS, GRID_COLS, KEY_WIDTH)
    const width = GRID_COLS * KEY_WIDTH + KEY_WIDTH
    const height = (GRID_ROWS - 1) * KEY_WIDTH * (Math.sqrt(3) / 2) + 2 * KEY_WIDTH
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg")
    svg.setAttribute("width", String(width))
    svg.setAttribute("height", String(height))
    svg.setAttribute("class", "grid")
    for (const key of keys) {
      const poly = document.createElementNS("http://www.w3.org/2000/svg", "polygon")
      poly.setAttribute("points", hexOutline(key.cx + KEY_WIDTH, key.cy + KEY_WIDTH, KEY_WIDTH))
      const isTarget =
        this.target !== null && key.row === this.target.row && key.col === this.target.col
      poly.setAttribute("class", isTarget && this.pauseStart === null ? "key target" : "key")
      svg.appendChild(poly)
    }
    svg.addEventListener("click", (evt) => void this.handleGridClick(evt, svg, keys))
    this.root.appendChild(svg)
  }

  private layoutKeys(layout: LayoutDoc): { key: Key; char: string }[] {
    return layout.keys.map((k) => ({
      key: { row: k.row, col: k.col, cx: k.cx, cy: k.cy },
      char: k.char,
    }))
  }

  private renderKeyboard(layout: LayoutDoc, hidden: boolean, clickable: boolean): SVGSVGElement {
    const keys = this.layoutKeys(layout)
    const maxX = Math.max(...keys.map((k) => k.key.cx))
    const maxY = Math.max(...keys.map((k) => k.key.cy))
    const svg = document.createElementNS("http://www.w3.org/2000/svg", "svg")
    svg.setAttribute("width", String(maxX + 2 * KEY_WIDTH))
    svg.setAttribute("height", String(maxY + 2 * KEY_WIDTH))
    svg.setAttribute("class", "grid")
    for (const { key, char } of keys) {
      const group = document.createElementNS("http://www.w3.org/2000/svg", "g")
      const poly = document.createElementNS("http://www.w3.org/2000/svg", "polygon")
      poly.setAttribute("points", hexOutline(key.cx + KEY_WIDTH, key.cy + KEY_WIDTH, KEY_WIDTH))
      poly.setAttribute("class", "key letter")
      group.appendChild(poly)
      if (!hidden) {
        const label = document.createElementNS("http://www.w3.org/2000/svg", "text")
        label.setAttribute("x", String(key.cx + KEY_WIDTH))
        label.setAttribute("y", String(key.cy + KEY_WIDTH + 10))
        label.setAttribute("class", "label")
        label.textContent = char === " " ? "␣" : char
        group.appendChild(label)
      }
      svg.appendChild(group)
    }
    if (clickable) {
      svg.addEventListener("click", (evt) => void this.handleKeyboardClick(evt, svg, keys))
    }
    return svg
  }

  private renderTyping(): void {
    this.root.appendChild(el("h2", {}, "communication task"))
    if (this.trialId === null) {
      const start = el("button", {}, "start a trial on your keyboard")
      start.onclick = () => void this.beginTrial(this.layoutId as string, this.layout as LayoutDoc)
      this.root.appendChild(start)
      if (this.reports.length > 0) {
        const qwerty = el("button", {}, "type the same prompt on QWERTY")
        qwerty.onclick = () => void this.compareOnQwerty()
        this.root.appendChild(qwerty)
        this.renderReports()
      }
      if (this.layout) this.root.appendChild(this.renderKeyboard(this.layout, false, false))
      return
    }

    this.root.appendChild(el("p", { class: "prompt" }, this.prompt))
    this.root.appendChild(el("p", { class: "typed" }, this.typed || " "))
    if (!this.revealed) {
      const reveal = el("button", {}, "reveal letters and start")
      reveal.onclick = () => this.reveal()
      this.root.appendChild(reveal)
    } else if (this.typedPointer >= this.prompt.length) {
      const finish = el("button", {}, "finish trial")
      finish.onclick = () => void this.finishTrial()
      this.root.appendChild(finish)
    } else {
      this.root.appendChild(
        el("p", { class: "hint" }, "keep going even after a wrong key; there is no backspace"),
      )
    }
    const layout = this.trialLayout as LayoutDoc
    this.root.appendChild(this.renderKeyboard(layout, !this.revealed, this.revealed))
  }

  private renderReports(): void {
    const table = el("table", { class: "reports" })
    const head = el("tr")
    for (const h of ["prompt", "keys", "acc %", "wpm", "wpm*", "itr"]) head.appendChild(el("th", {}, h))
    table.appendChild(head)
    for (const r of this.reports) {
      const row = el("tr")
      row.appendChild(el("td", {}, r.prompt.toLowerCase()))
      row.appendChild(el("td", {}, String(r.n_keystrokes)))
      row.appendChild(el("td", {}, r.accuracy_pct.toFixed(1)))
      row.appendChild(el("td", {}, r.wpm.toFixed(2)))
      row.appendChild(el("td", {}, r.wpm_star.toFixed(2)))
      row.appendChild(el("td", {}, r.itr_bits_per_min.toFixed(1)))
      table.appendChild(row)
    }
    this.root.appendChild(table)
  }
}

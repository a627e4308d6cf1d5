// Thin typed client for the keyfitts service API. The UI never computes
// protocol decisions locally; every next target, refinement and completion
// comes from these endpoints.

export interface KeyDoc {
  row: number
  col: number
  cx: number
  cy: number
}

export interface Progress {
  presented: number
  cap: number
  per_bin_r2: (number | null)[]
}

export interface ClickResponse {
  success: boolean
  next_target: KeyDoc | null
  progress: Progress
}

export interface SessionCreated {
  session_id: string
  first_target: KeyDoc
  progress: Progress
}

export interface LayoutDoc {
  kind: string
  grid: { rows: number; cols: number; key_width_px: number }
  keys: { char: string; row: number; col: number; cx: number; cy: number }[]
  provenance: Record<string, unknown>
}

export interface TrialReport {
  accuracy_pct: number
  wpm: number
  wpm_star: number
  itr_bits_per_min: number
  n_keystrokes: number
  prompt: string
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async post<T>(path: string, body: unknown, expectJson = true): Promise<T> {
    const resp = await this.fetchImpl(this.base + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    })
    if (!resp.ok) {
      const text = await resp.text()
      throw new Error(`POST ${path} -> ${resp.status}: ${text}`)
    }
    return expectJson ? ((await resp.json()) as T) : (undefined as T)
  }

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchImpl(this.base + path)
    if (!resp.ok) {
      throw new Error(`GET ${path} -> ${resp.status}`)
    }
    return (await resp.json()) as T
  }

  createSession(seed: number): Promise<SessionCreated> {
    return this.post("/sessions", { seed })
  }

  postClick(sessionId: string, key: { row: number; col: number }, t: number, seq: number): Promise<ClickResponse> {
    return this.post(`/sessions/${sessionId}/clicks`, {
      clicked_key: { row: key.row, col: key.col },
      t,
      seq,
    })
  }

  postPause(sessionId: string, t0: number, t1: number): Promise<void> {
    return this.post(`/sessions/${sessionId}/pause`, { t0, t1 }, false)
  }

  getModel(sessionId: string): Promise<unknown> {
    return this.get(`/sessions/${sessionId}/model`)
  }

  generateLayout(kind: string, sessionId: string | null, seed: number): Promise<{ layout_id: string; layout: LayoutDoc }> {
    const body: Record<string, unknown> = { kind, seed }
    if (sessionId) body.session_id = sessionId
    return this.post("/layouts", body)
  }

  startTrial(layoutId: string, prompt: string): Promise<{ trial_id: string; prompt: string }> {
    return this.post("/trials", { layout_id: layoutId, prompt })
  }

  postKeystroke(trialId: string, charTarget: string, charSelected: string, t: number): Promise<void> {
    return this.post(
      `/trials/${trialId}/keystrokes`,
      { char_target: charTarget, char_selected: charSelected, t },
      false,
    )
  }

  finishTrial(trialId: string): Promise<TrialReport> {
    return this.post(`/trials/${trialId}/finish`, {})
  }
}

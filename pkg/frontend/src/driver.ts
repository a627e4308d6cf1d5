// Characterization click sequencing: exactly one in-flight POST per session,
// consecutive client sequence numbers, and idempotent retry on network
// failure (the server deduplicates by seq). Given the same click sequence,
// the resulting server-side NDJSON log is byte-identical to posting the
// clicks directly, because the driver adds nothing beyond the payload.

import { ApiClient, ClickResponse, KeyDoc } from "./api.js"

export interface ClickInput {
  clicked_key: { row: number; col: number }
  t: number
}

export interface DriverEvents {
  onTarget?: (target: KeyDoc | null, response: ClickResponse) => void
  onError?: (err: Error, attempt: number) => void
}

export class SessionDriver {
  private seq = 0
  private inFlight = false
  private queue: { click: ClickInput; resolve: (r: ClickResponse) => void; reject: (e: Error) => void }[] = []

  constructor(
    private api: ApiClient,
    private sessionId: string,
    private events: DriverEvents = {},
    private maxRetries = 3,
  ) {}

  get pending(): number {
    return this.queue.length + (this.inFlight ? 1 : 0)
  }

  submit(click: ClickInput): Promise<ClickResponse> {
    return new Promise((resolve, reject) => {
      this.queue.push({ click, resolve, reject })
      void this.pump()
    })
  }

  private async pump(): Promise<void> {
    if (this.inFlight) return
    const entry = this.queue.shift()
    if (!entry) return
    this.inFlight = true
    this.seq += 1
    const seq = this.seq
    let lastError: Error | null = null
    for (let attempt = 0; attempt <= this.maxRetries; attempt++) {
      try {
        const response = await this.api.postClick(this.sessionId, entry.click.clicked_key, entry.click.t, seq)
        this.events.onTarget?.(response.next_target, response)
        entry.resolve(response)
        lastError = null
        break
      } catch (err) {
        lastError = err as Error
        this.events.onError?.(lastError, attempt)
      }
    }
    if (lastError) entry.reject(lastError)
    this.inFlight = false
    void this.pump()
  }

  // Replay a fixed click sequence (scripted sessions and tests).
  async replay(clicks: ClickInput[]): Promise<ClickResponse[]> {
    const responses: ClickResponse[] = []
    for (const click of clicks) {
      responses.push(await this.submit(click))
    }
    return responses
  }
}

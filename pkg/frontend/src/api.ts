// Thin typed client. No business rules live here: the server decides,
// this file only moves JSON and surfaces error codes verbatim.

import type {
  Action,
  Channel,
  DeliveryReport,
  InstanceView,
  Kind,
  Me,
  NotificationView,
  SubscriptionView,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl.replace(/\/$/, "") + path, {
      method,
      headers: {
        Authorization: `Bearer ${this.token}`,
        ...(body === undefined ? {} : { "Content-Type": "application/json" }),
      },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      let code = `HTTP ${response.status}`;
      let message = response.statusText;
      try {
        const parsed = (await response.json()) as { code?: string; message?: string };
        if (parsed.code) code = parsed.code;
        if (parsed.message) message = parsed.message;
      } catch {
        // non-JSON error body; keep the status line
      }
      throw new ApiError(response.status, code, message);
    }
    return (await response.json()) as T;
  }

  me(): Promise<Me> {
    return this.request("GET", "/me");
  }

  submitRequest(body: {
    kind: Kind;
    amount: number;
    currency?: string;
    details?: Record<string, string>;
  }): Promise<InstanceView> {
    return this.request("POST", "/requests", body);
  }

  getRequest(requestId: string): Promise<InstanceView> {
    return this.request("GET", `/requests/${encodeURIComponent(requestId)}`);
  }

  history(requestId: string): Promise<InstanceView["history"]> {
    return this.request("GET", `/requests/${encodeURIComponent(requestId)}/history`);
  }

  decide(requestId: string, action: Action, reason = ""): Promise<InstanceView> {
    return this.request("POST", `/requests/${encodeURIComponent(requestId)}/decision`, {
      action,
      reason,
    });
  }

  queue(tierId: string): Promise<InstanceView[]> {
    return this.request("GET", `/queues/${encodeURIComponent(tierId)}`);
  }

  subscribe(topic: string, channel: Channel): Promise<SubscriptionView> {
    return this.request("POST", "/subscriptions", { topic, channel });
  }

  unsubscribe(subscriptionId: string): Promise<SubscriptionView> {
    return this.request("DELETE", `/subscriptions/${encodeURIComponent(subscriptionId)}`);
  }

  subscriptions(customerId: string): Promise<SubscriptionView[]> {
    return this.request("GET", `/customers/${encodeURIComponent(customerId)}/subscriptions`);
  }

  notifications(customerId: string): Promise<NotificationView[]> {
    return this.request("GET", `/customers/${encodeURIComponent(customerId)}/notifications`);
  }

  publish(body: {
    topic: string;
    subject_ref?: string | null;
    payload?: Record<string, string>;
  }): Promise<DeliveryReport> {
    return this.request("POST", "/events", body);
  }
}

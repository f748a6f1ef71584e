// DOM glue: login with a role token, then route to the officer or
// customer view. All state lives on the server; every refresh redraws
// from API responses.

import { ApiClient, ApiError } from "./api.js";
import { inboxList, queueTable, requestDetail, subscriptionList } from "./render.js";
import { DEFAULT_POLL_MS, startPolling, type Poller } from "./poll.js";
import type { Channel, InstanceView, Kind, Me } from "./types.js";

const app = document.getElementById("app") as HTMLElement;
const toasts = document.getElementById("toasts") as HTMLElement;

let client: ApiClient | null = null;
let me: Me | null = null;
let poller: Poller | null = null;
let selectedRequest: string | null = null;

function toast(message: string, kind: "error" | "info" = "error"): void {
  const node = document.createElement("div");
  node.className = `toast ${kind}`;
  node.textContent = message;
  toasts.appendChild(node);
  setTimeout(() => node.remove(), 6000);
}

function surface(error: unknown): void {
  if (error instanceof ApiError) {
    toast(`${error.code}: ${error.message}`);
  } else {
    toast(String(error));
  }
}

function apiBase(): string {
  const input = document.getElementById("api-url") as HTMLInputElement | null;
  return input?.value || window.location.origin;
}

function loginView(): void {
  app.innerHTML = `
    <section class="login">
      <h2>Sign in</h2>
      <label>API <input id="api-url" value="${window.location.origin}"></label>
      <label>Role token <input id="token" placeholder="tok-..."></label>
      <button id="login">Enter</button>
      <p class="hint">Demo tokens: tok-alice (customer), tok-bsc / tok-ozssc / tok-ho (officers), tok-admin.</p>
    </section>`;
  (document.getElementById("login") as HTMLButtonElement).onclick = async () => {
    const token = (document.getElementById("token") as HTMLInputElement).value.trim();
    if (!token) return toast("enter a token");
    const candidate = new ApiClient(apiBase(), token);
    try {
      me = await candidate.me();
      client = candidate;
      route();
    } catch (error) {
      surface(error);
    }
  };
}

function route(): void {
  poller?.stop();
  if (!client || !me) return loginView();
  if (me.role === "officer") officerView();
  else customerView();
}

function officerView(): void {
  const tier = me!.tier_id!;
  app.innerHTML = `
    <header><h2>${tier} queue</h2><span>${me!.actor_id}</span>
      <button id="logout">sign out</button></header>
    <div class="columns"><div id="queue"></div><div id="detail"></div></div>`;
  wireLogout();
  const queueBox = document.getElementById("queue") as HTMLElement;
  const detailBox = document.getElementById("detail") as HTMLElement;

  const refresh = async (): Promise<void> => {
    try {
      const items = await client!.queue(tier);
      if (selectedRequest && !items.some((i) => i.request_id === selectedRequest)) {
        selectedRequest = null;
        detailBox.innerHTML = "";
      }
      queueBox.innerHTML = queueTable(items, selectedRequest);
      const current = items.find((i) => i.request_id === selectedRequest);
      if (current) detailBox.innerHTML = requestDetail(current);
    } catch (error) {
      surface(error);
    }
  };

  queueBox.addEventListener("click", (event) => {
    const row = (event.target as HTMLElement).closest("tr[data-request]");
    if (!row) return;
    selectedRequest = row.getAttribute("data-request");
    void poller?.tick();
  });

  detailBox.addEventListener("click", async (event) => {
    const button = (event.target as HTMLElement).closest("button[data-action]");
    if (!button || button.hasAttribute("disabled")) return;
    const action = button.getAttribute("data-action") as "approve" | "reject" | "escalate";
    const requestId = button.closest("[data-request]")!.getAttribute("data-request")!;
    const reason = prompt(`Reason for ${action} (optional)`) ?? "";
    try {
      const view: InstanceView = await client!.decide(requestId, action, reason);
      toast(`${requestId} ${view.status === "pending" ? "escalated" : view.status}`, "info");
    } catch (error) {
      surface(error);
    }
    void poller?.tick();
  });

  poller = startPolling(refresh, DEFAULT_POLL_MS);
}

function customerView(): void {
  const customer = me!.actor_id;
  app.innerHTML = `
    <header><h2>Customer desk</h2><span>${customer}</span>
      <button id="logout">sign out</button></header>
    <div class="columns">
      <div>
        <h3>New request</h3>
        <form id="submit-form">
          <select id="kind">
            <option value="loan">loan</option>
            <option value="insurance_claim">insurance claim</option>
            <option value="account_opening">account opening</option>
          </select>
          <input id="amount" type="number" min="0" value="0" title="amount in minor units">
          <button>Submit</button>
        </form>
        <h3>Subscriptions</h3>
        <form id="subscribe-form">
          <input id="topic" placeholder="request.approved or *">
          <select id="channel">
            <option>in_app</option><option>email</option><option>sms</option>
          </select>
          <button>Subscribe</button>
        </form>
        <div id="subs"></div>
      </div>
      <div><h3>Inbox</h3><div id="inbox"></div></div>
    </div>`;
  wireLogout();
  const subsBox = document.getElementById("subs") as HTMLElement;
  const inboxBox = document.getElementById("inbox") as HTMLElement;

  const refresh = async (): Promise<void> => {
    try {
      const [subs, inbox] = await Promise.all([
        client!.subscriptions(customer),
        client!.notifications(customer),
      ]);
      subsBox.innerHTML = subscriptionList(subs);
      inboxBox.innerHTML = inboxList(inbox);
    } catch (error) {
      surface(error);
    }
  };

  (document.getElementById("submit-form") as HTMLFormElement).onsubmit = async (event) => {
    event.preventDefault();
    const kind = (document.getElementById("kind") as HTMLSelectElement).value as Kind;
    const amount = Number((document.getElementById("amount") as HTMLInputElement).value);
    try {
      const view = await client!.submitRequest({ kind, amount });
      toast(`${view.request_id} submitted, waiting at ${view.current_tier_id}`, "info");
    } catch (error) {
      surface(error);
    }
  };

  (document.getElementById("subscribe-form") as HTMLFormElement).onsubmit = async (event) => {
    event.preventDefault();
    const topic = (document.getElementById("topic") as HTMLInputElement).value.trim();
    const channel = (document.getElementById("channel") as HTMLSelectElement).value as Channel;
    try {
      await client!.subscribe(topic, channel);
      void poller?.tick();
    } catch (error) {
      surface(error);
    }
  };

  subsBox.addEventListener("click", async (event) => {
    const button = (event.target as HTMLElement).closest("button[data-unsubscribe]");
    if (!button) return;
    try {
      await client!.unsubscribe(button.getAttribute("data-unsubscribe")!);
      void poller?.tick();
    } catch (error) {
      surface(error);
    }
  });

  poller = startPolling(refresh, DEFAULT_POLL_MS);
}

function wireLogout(): void {
  (document.getElementById("logout") as HTMLButtonElement).onclick = () => {
    poller?.stop();
    client = null;
    me = null;
    selectedRequest = null;
    loginView();
  };
}

loginView();

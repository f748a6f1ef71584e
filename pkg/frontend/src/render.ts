// Pure HTML-string renderers. Keeping them DOM-free makes the views unit
// testable in node; main.ts owns the actual DOM.

import { approveGate, escalateGate, formatAmount, formatLimit, rejectGate } from "./gating.js";
import type { InstanceView, NotificationView, SubscriptionView } from "./types.js";

export function esc(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function queueTable(items: InstanceView[], selected: string | null): string {
  if (items.length === 0) {
    return '<p class="empty">Queue is empty.</p>';
  }
  const rows = items
    .map((item) => {
      const cls = item.request_id === selected ? ' class="selected"' : "";
      return (
        `<tr${cls} data-request="${esc(item.request_id)}">` +
        `<td>${esc(item.request_id)}</td>` +
        `<td>${esc(item.kind)}</td>` +
        `<td class="num">${esc(formatAmount(item.amount, item.currency))}</td>` +
        `<td>${esc(item.customer_id)}</td>` +
        `<td>${esc(item.submitted_at)}</td></tr>`
      );
    })
    .join("");
  return (
    "<table><thead><tr><th>request</th><th>kind</th><th>amount</th>" +
    "<th>customer</th><th>submitted</th></tr></thead>" +
    `<tbody>${rows}</tbody></table>`
  );
}

function actionButton(
  action: string,
  gate: { disabled: boolean; reason: string | null },
): string {
  const disabled = gate.disabled ? " disabled" : "";
  const badge = gate.disabled && gate.reason
    ? `<span class="badge">${esc(gate.reason)}</span>`
    : "";
  return `<button data-action="${action}"${disabled}>${action}</button>${badge}`;
}

export function requestDetail(view: InstanceView): string {
  const history = view.history
    .map(
      (event) =>
        `<li>${esc(event.action)} at ${esc(event.tier_id)} by ${esc(event.actor_id)}` +
        (event.reason ? ` — ${esc(event.reason)}` : "") +
        `</li>`,
    )
    .join("");
  const details = Object.entries(view.details)
    .map(([key, value]) => `<li>${esc(key)}: ${esc(value)}</li>`)
    .join("");
  return (
    `<h3>${esc(view.request_id)} <span class="status ${esc(view.status)}">${esc(view.status)}</span></h3>` +
    `<p>${esc(view.kind)} for ${esc(formatAmount(view.amount, view.currency))} ` +
    `by ${esc(view.customer_id)}</p>` +
    `<p>At tier <strong>${esc(view.current_tier_id)}</strong> (${esc(view.current_tier_name)}), ` +
    `authority ${esc(formatLimit(view))}</p>` +
    (details ? `<ul class="details">${details}</ul>` : "") +
    `<div class="actions" data-request="${esc(view.request_id)}">` +
    actionButton("approve", approveGate(view)) +
    actionButton("escalate", escalateGate(view)) +
    actionButton("reject", rejectGate(view)) +
    "</div>" +
    (history ? `<h4>History</h4><ol>${history}</ol>` : "<p>No decisions yet.</p>")
  );
}

export function inboxList(items: NotificationView[]): string {
  if (items.length === 0) {
    return '<p class="empty">No notifications yet.</p>';
  }
  const rows = [...items]
    .reverse()
    .map(
      (n) =>
        `<li class="${esc(n.status)}"><strong>${esc(n.topic)}</strong> ` +
        `<span class="meta">${esc(n.channel)} · ${esc(n.status)} · ${esc(n.occurred_at)}</span>` +
        (n.subject_ref ? `<span class="meta"> · ${esc(n.subject_ref)}</span>` : "") +
        `</li>`,
    )
    .join("");
  return `<ul class="inbox">${rows}</ul>`;
}

export function subscriptionList(subs: SubscriptionView[]): string {
  const active = subs.filter((s) => s.active);
  if (active.length === 0) {
    return '<p class="empty">No active subscriptions.</p>';
  }
  const rows = active
    .map(
      (s) =>
        `<li>${esc(s.topic)} via ${esc(s.channel)} ` +
        `<button data-unsubscribe="${esc(s.subscription_id)}">unsubscribe</button></li>`,
    )
    .join("");
  return `<ul class="subs">${rows}</ul>`;
}

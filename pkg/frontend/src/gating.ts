// Display gating only: the server re-checks everything. These mirrors of
// the tier rules exist so buttons can be disabled with an explanation
// instead of surprising the officer with a 409.

import type { InstanceView } from "./types.js";

export interface Gate {
  disabled: boolean;
  reason: string | null;
}

export function formatAmount(amount: number, currency: string): string {
  return `${amount.toLocaleString("en-IN")} ${currency}`;
}

export function formatLimit(view: InstanceView): string {
  return view.current_tier_limit === "UNBOUNDED"
    ? "no limit"
    : formatAmount(view.current_tier_limit, view.currency);
}

export function approveGate(view: InstanceView): Gate {
  if (view.status !== "pending") {
    return { disabled: true, reason: `already ${view.status}` };
  }
  if (view.current_tier_limit !== "UNBOUNDED" && view.amount > view.current_tier_limit) {
    return {
      disabled: true,
      reason: `${formatAmount(view.amount, view.currency)} exceeds the ` +
        `${view.current_tier_id} limit of ${formatLimit(view)}`,
    };
  }
  return { disabled: false, reason: null };
}

export function escalateGate(view: InstanceView): Gate {
  if (view.status !== "pending") {
    return { disabled: true, reason: `already ${view.status}` };
  }
  if (view.is_last_tier) {
    return { disabled: true, reason: `${view.current_tier_id} is the final tier` };
  }
  return { disabled: false, reason: null };
}

export function rejectGate(view: InstanceView): Gate {
  if (view.status !== "pending") {
    return { disabled: true, reason: `already ${view.status}` };
  }
  return { disabled: false, reason: null };
}

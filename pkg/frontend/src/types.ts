// Wire types of the bankflow HTTP API, mirrored field for field.

export type Kind = "loan" | "insurance_claim" | "account_opening";
export type Action = "approve" | "reject" | "escalate";
export type Channel = "email" | "sms" | "in_app";
export type Role = "customer" | "officer" | "admin";
export type Limit = number | "UNBOUNDED";

export interface DecisionEventView {
  seq: number;
  request_id: string;
  tier_id: string;
  actor_id: string;
  action: Action;
  reason: string;
  decided_at: string;
}

export interface InstanceView {
  request_id: string;
  customer_id: string;
  kind: Kind;
  amount: number;
  currency: string;
  submitted_at: string;
  details: Record<string, string>;
  chain_id: string;
  status: "pending" | "approved" | "rejected";
  current_tier_index: number;
  current_tier_id: string;
  current_tier_name: string;
  current_tier_limit: Limit;
  is_last_tier: boolean;
  history: DecisionEventView[];
}

export interface SubscriptionView {
  subscription_id: string;
  customer_id: string;
  topic: string;
  channel: Channel;
  active: boolean;
  created_at: string;
}

export interface NotificationView {
  delivery_id: string;
  event_seq: number;
  topic: string;
  subject_ref: string | null;
  payload: Record<string, string>;
  occurred_at: string;
  channel: Channel;
  status: "queued" | "delivered" | "failed";
  attempts: number;
  last_error: string | null;
}

export interface DeliveryReport {
  matched: number;
  queued: number;
}

export interface Me {
  actor_id: string;
  role: Role;
  tier_id: string | null;
}

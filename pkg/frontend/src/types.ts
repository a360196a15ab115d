export type ItemStatus = "generated" | "accepted" | "edited" | "rejected";

export interface Provenance {
  caption_id: string;
  sentence_index: number;
  rule_id: string;
}

export interface QueueItem {
  qa_id: string;
  image_id: string;
  image_url: string;
  qtype: string;
  question: string;
  answer: string;
  status: ItemStatus;
  caption_text: string;
  provenance: Provenance;
}

export interface QueuePage {
  total: number;
  page: number;
  page_size: number;
  items: QueueItem[];
}

export interface ReviewStats {
  total: number;
  generated: number;
  accepted: number;
  edited: number;
  rejected: number;
}

export type DecisionAction = "accept" | "reject" | "edit";

export interface DecisionRequest {
  action: DecisionAction;
  reviewer?: string;
  edited_question?: string;
  edited_answer?: string;
  note?: string;
}

export interface ExportResult {
  path: string;
  exported: number;
}

// Shapes of the JSON API responses the client consumes.

export interface Group {
  id: number;
  slug: string;
  name: string;
  visibility: 'open' | 'closed';
  description: string;
  announcements: [string, string][]; // [iso timestamp, text]
  links: [string, string][];         // [label, url]
  members: number[];
  meeting_areas: number[];
}

export interface Item {
  id: number;
  area: number;
  author: number;
  created_at: string;
  title: string;
  kind: string;
  url: string | null;
  body: string | null;
  reference_token: string;
}

export interface Area {
  id: number;
  slug: string;
  name: string;
  owner_groups: number[];
  items: number[];
  subscribers: number[];
  item_details?: Item[];
}

export interface Comment {
  id: number;
  area: number;
  author: number;
  author_name: string;
  posted_at: string;
  subject: string;
  body: string;
  target: { kind: string; ref: number | null };
  reference_token: string;
  header: string;
}

export type SortKey = 'subject' | 'item' | 'date' | 'author';

export interface ThreadIndex {
  sort_key: SortKey;
  total_threads: number;
  limit: number;
  offset: number;
  entries: { header: string; threads: Comment[][] }[];
}

export interface Anchor {
  anchor_id: number;
  rev_id: number;
  offset: number;
  comment: number;
  migrated: boolean;
  source_anchor: number | null;
}

export interface Revision {
  rev_id: number;
  doc: number;
  parent: number | null;
  author: number;
  created_at: string;
  body: string;
  rendered: string;
  anchors: Anchor[];
}

export interface DecisionConfig {
  kind: 'poll' | 'decision';
  question: string;
  options: string[];
  method: 'choose_one' | 'approval' | 'ranked';
  rule: { kind: string; fraction: string | null };
  basis: string;
  deadline: string;
  quorum: number | null;
}

export interface BallotContent {
  kind: 'one' | 'approve' | 'rank' | 'abstain';
  choice: string | null;
  options: string[];
}

export interface Ballot {
  voter: number;
  cast_at: string;
  content: BallotContent;
  annotation: string | null;
  history: unknown[];
}

export interface Decision extends Item {
  config: DecisionConfig;
  closed: boolean;
  ballots: Record<string, Ballot>;
}

export interface Tally {
  computed_at: string;
  provisional: boolean;
  per_option_scores: Record<string, number>;
  ballots_cast: number;
  abstentions: number;
  distinct_voters: number;
  outcome: { kind: string; option: string | null; options: string[] };
}

export interface Task {
  id: number;
  project: number;
  title: string;
  priority: string;
  status: string;
  handlers: number[];
  handler_names: string[];
  created_at: string;
  updated_at: string;
  description: string;
}

export interface TaskList {
  project: number;
  total: number;
  tasks: Task[];
}

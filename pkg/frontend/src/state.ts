// Client-side view state. The UI never computes tallies, sort orders or
// anchor offsets itself -- those arrive from the API and are stored verbatim.

import { Area, BallotContent, SortKey, ThreadIndex } from './types';

export type LeftPane =
  | { kind: 'index' }
  | { kind: 'item'; itemId: number; revId?: number };

export interface BallotDraft {
  decisionId: number;
  content: BallotContent;
  annotation: string;
}

export interface ViewState {
  groupId: number | null;
  area: Area | null;
  left: LeftPane;
  index: ThreadIndex | null;
  sortKey: SortKey;
  expanded: 'item' | 'discussion' | null;
  ballotDraft: BallotDraft | null;
}

export function initialState(): ViewState {
  return {
    groupId: null,
    area: null,
    left: { kind: 'index' },
    index: null,
    sortKey: 'date',
    expanded: null,
    ballotDraft: null,
  };
}

export function selectItem(state: ViewState, itemId: number, revId?: number): ViewState {
  return { ...state, left: { kind: 'item', itemId, revId } };
}

export function backToIndex(state: ViewState): ViewState {
  return { ...state, left: { kind: 'index' } };
}

export function setIndex(state: ViewState, index: ThreadIndex): ViewState {
  return { ...state, index, sortKey: index.sort_key };
}

/** Resolve a clicked reference token to the item to load on the left. */
export function followReference(state: ViewState, token: string): ViewState {
  const m = /^\[item:([0-9]+)\]$/.exec(token);
  if (!m) return state; // comment references scroll, they do not navigate
  return selectItem(state, Number(m[1]));
}

export function expandPane(state: ViewState, pane: 'item' | 'discussion'): ViewState {
  return { ...state, expanded: pane };
}

export function closeExpanded(state: ViewState): ViewState {
  return { ...state, expanded: null };
}

export function setBallotDraft(state: ViewState, draft: BallotDraft | null): ViewState {
  return { ...state, ballotDraft: draft };
}

/** Submission is allowed up to and including the deadline instant. */
export function ballotOpen(deadlineIso: string, nowIso: string, closed: boolean): boolean {
  if (closed) return false;
  return Date.parse(nowIso) <= Date.parse(deadlineIso);
}

// Browser entry point: owns the one mutable ViewState, delegates clicks on
// the data-* hooks emitted by render.ts, and talks to the API client.
// Untested glue -- everything interesting lives in the pure modules.

import { ApiClient } from './api';
import { codePointOffset } from './offsets';
import { renderDocumentView, renderMeetingArea } from './render';
import {
  ViewState,
  closeExpanded,
  expandPane,
  followReference,
  initialState,
  selectItem,
  setIndex,
} from './state';
import { Item, Revision, SortKey } from './types';

const api = new ApiClient('/');
let state: ViewState = initialState();
let root: HTMLElement;

async function refresh(): Promise<void> {
  let itemHtml = '';
  if (state.left.kind === 'item' && state.area) {
    const detail = (state.area.item_details ?? []).find(
      (it: Item) => state.left.kind === 'item' && it.id === state.left.itemId,
    );
    if (detail && detail.kind === 'document') {
      const revId = state.left.revId ?? latestRevision(detail);
      const rev: Revision = await api.getRevision(detail.id, revId);
      itemHtml = renderDocumentView(detail, rev);
    }
  }
  root.innerHTML = renderMeetingArea(state, itemHtml);
}

function latestRevision(item: Item & { revisions?: number[] }): number {
  const revs = item.revisions ?? [];
  return revs[revs.length - 1];
}

async function loadArea(areaId: number): Promise<void> {
  state.area = await api.getArea(areaId);
  state = setIndex(state, await api.getIndex(areaId, state.sortKey));
  await refresh();
}

function onClick(ev: MouseEvent): void {
  const el = (ev.target as HTMLElement).closest('[data-item],[data-ref],[data-expand],[data-comment],[data-area]');
  if (!el) return;
  ev.preventDefault();
  const d = (el as HTMLElement).dataset;
  if (d.item) {
    state = selectItem(state, Number(d.item));
    void refresh();
  } else if (d.ref) {
    const next = followReference(state, d.ref);
    if (next !== state) {
      state = next;
      void refresh();
    } else {
      // comment reference: scroll within the discussion pane
      const m = /^\[c:([0-9]+)\]$/.exec(d.ref);
      if (m) document.getElementById(`comment-${m[1]}`)?.scrollIntoView();
    }
  } else if (d.expand) {
    // the expanded pane opens in its own window; Escape closes it here
    state = expandPane(state, d.expand as 'item' | 'discussion');
    void refresh();
  } else if (d.comment) {
    document.getElementById(`comment-${d.comment}`)?.scrollIntoView();
  } else if (d.area) {
    void loadArea(Number(d.area));
  }
}

function onChange(ev: Event): void {
  const el = ev.target as HTMLSelectElement;
  if (el.matches('[data-sort]') && state.area) {
    state.sortKey = el.value as SortKey;
    void loadArea(state.area.id);
  }
}

/** Anchor placement: convert the DOM selection to a code-point offset. */
function onSelect(): void {
  const sel = window.getSelection();
  if (!sel || sel.rangeCount === 0 || state.left.kind !== 'item') return;
  const range = sel.getRangeAt(0);
  const pre = (range.startContainer.parentElement as HTMLElement)
    ?.closest('[data-compose-target]');
  if (!pre) return;
  const text = pre.textContent ?? '';
  const offset = codePointOffset(text, range.startOffset);
  const body = window.prompt(`Comment at offset ${offset}:`);
  if (body) {
    const article = pre.closest('[data-rev]') as HTMLElement;
    void api
      .placeAnchor(Number(article.dataset.rev), offset, body)
      .then(refresh);
  }
}

function onKey(ev: KeyboardEvent): void {
  if (ev.key === 'Escape' && state.expanded) {
    state = closeExpanded(state);
    void refresh();
  }
}

export function mount(el: HTMLElement): void {
  root = el;
  root.addEventListener('click', onClick);
  root.addEventListener('change', onChange);
  root.addEventListener('mouseup', onSelect);
  document.addEventListener('keydown', onKey);
  void refresh();
}

if (typeof document !== 'undefined') {
  const el = document.getElementById('app');
  if (el) mount(el);
}

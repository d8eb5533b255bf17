// HTML renderers. Every function is pure: state/API JSON in, markup out.
// Event wiring (clicks on data-* hooks) lives in main.ts.

import {
  Area,
  Comment,
  Decision,
  Group,
  Item,
  Revision,
  Tally,
  Task,
  ThreadIndex,
} from './types';
import { ViewState, ballotOpen } from './state';

export function esc(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

const SORT_KEYS = ['subject', 'item', 'date', 'author'] as const;

// ---------------------------------------------------------------------------
// meeting area: items on the left, discussion on the right
// ---------------------------------------------------------------------------

export function renderMeetingArea(state: ViewState, itemBody = ''): string {
  const left = `
    <section class="pane pane-left" data-pane="item">
      <button class="expand" data-expand="item" title="Expand">⤢</button>
      ${state.left.kind === 'index' && state.area
        ? renderItemIndex(state.area)
        : itemBody}
    </section>`;
  const right = `
    <section class="pane pane-right" data-pane="discussion">
      <button class="expand" data-expand="discussion" title="Expand">⤢</button>
      ${renderSortSelector(state.sortKey)}
      ${state.index ? renderThreadIndex(state.index) : '<p>No discussion yet.</p>'}
    </section>`;
  if (state.expanded === 'item') {
    return `<div class="meeting-area expanded">${left}</div>`;
  }
  if (state.expanded === 'discussion') {
    return `<div class="meeting-area expanded">${right}</div>`;
  }
  return `<div class="meeting-area split">${left}${right}</div>`;
}

export function renderSortSelector(active: string): string {
  const options = SORT_KEYS.map(
    k => `<option value="${k}"${k === active ? ' selected' : ''}>${k}</option>`,
  );
  return `<label class="sort">Sort by
    <select data-sort>${options.join('')}</select></label>`;
}

export function renderItemIndex(area: Area): string {
  const rows = (area.item_details ?? []).map(
    item => `<li><a data-item="${item.id}">${esc(item.title)}</a>
      <span class="kind">${esc(item.kind)}</span></li>`,
  );
  return `<h2>${esc(area.name)}</h2>
    <ul class="item-index">${rows.join('')}</ul>`;
}

export function renderThreadIndex(index: ThreadIndex): string {
  const groups = index.entries.map(entry => {
    const threads = entry.threads
      .map(th => `<ol class="thread">${th.map(renderComment).join('')}</ol>`)
      .join('');
    return `<section class="index-group">
      <h3>${esc(entry.header)}</h3>${threads}</section>`;
  });
  return `<div class="thread-index" data-sort-key="${index.sort_key}">
    ${groups.join('')}</div>`;
}

export function renderComment(c: Comment): string {
  // header line: Subject | Author | timestamp | reference token (clickable)
  const token = c.header.split(' | ')[3];
  const ref = token
    ? ` <a class="ref" data-ref="${esc(token)}">${esc(token)}</a>`
    : '';
  return `<li class="comment" id="comment-${c.id}">
    <div class="comment-header">
      <strong>${esc(c.subject)}</strong> |
      ${esc(c.author_name)} |
      <time>${esc(c.posted_at)}</time>${ref}
    </div>
    <div class="comment-body">${esc(c.body)}</div>
  </li>`;
}

// ---------------------------------------------------------------------------
// documents with in-text comment markers
// ---------------------------------------------------------------------------

/** The server splices [c:N] markers into the rendered body; link them. */
export function renderDocumentView(item: Item, rev: Revision): string {
  const marked = esc(rev.rendered).replace(
    /\[c:([0-9]+)\]/g,
    (_, id) => `<a class="marker" data-comment="${id}">[c:${id}]</a>`,
  );
  return `<article class="document" data-doc="${rev.doc}" data-rev="${rev.rev_id}">
    <h2>${esc(item.title)}</h2>
    <pre class="doc-body" data-compose-target>${marked}</pre>
    <p class="hint">Select a point in the text to comment there.</p>
  </article>`;
}

export function renderRevisionSelector(revIds: number[], active: number): string {
  const options = revIds.map(
    r => `<option value="${r}"${r === active ? ' selected' : ''}>rev ${r}</option>`,
  );
  return `<label>Revision <select data-rev-select>${options.join('')}</select></label>`;
}

// ---------------------------------------------------------------------------
// ballots and tallies
// ---------------------------------------------------------------------------

export function renderBallotForm(
  decision: Decision,
  tally: Tally,
  userId: number,
  nowIso: string,
): string {
  const open = ballotOpen(decision.config.deadline, nowIso, decision.closed);
  if (!open) {
    // after the deadline the form gives way to the read-only result
    return `<section class="decision closed">
      <h2>${esc(decision.config.question)}</h2>
      ${renderTally(tally)}
    </section>`;
  }
  const mine = decision.ballots[String(userId)];
  const method = decision.config.method;
  const widgets = decision.config.options
    .map((opt, i) => renderChoiceWidget(method, opt, i, mine?.content))
    .join('');
  const annotation = mine?.annotation ?? '';
  return `<form class="ballot" data-decision="${decision.id}">
    <h2>${esc(decision.config.question)}</h2>
    <fieldset data-method="${method}">${widgets}</fieldset>
    <label>Annotation
      <input name="annotation" value="${esc(annotation)}"></label>
    <button type="submit">${mine ? 'Revise ballot' : 'Cast ballot'}</button>
    <p class="deadline">Open until <time>${esc(decision.config.deadline)}</time></p>
  </form>`;
}

function renderChoiceWidget(
  method: string,
  option: string,
  position: number,
  prior?: { kind: string; choice: string | null; options: string[] },
): string {
  if (method === 'choose_one') {
    const checked = prior?.kind === 'one' && prior.choice === option;
    return `<label><input type="radio" name="choice" value="${esc(option)}"
      ${checked ? 'checked' : ''}> ${esc(option)}</label>`;
  }
  if (method === 'approval') {
    const checked = prior?.kind === 'approve' && prior.options.includes(option);
    return `<label><input type="checkbox" name="approve" value="${esc(option)}"
      ${checked ? 'checked' : ''}> ${esc(option)}</label>`;
  }
  // ranked: an orderable list, prior ordering preserved
  const rank = prior?.kind === 'rank' ? prior.options.indexOf(option) : -1;
  return `<div class="rank-row" draggable="true" data-option="${esc(option)}"
    data-rank="${rank >= 0 ? rank : ''}">${esc(option)}</div>`;
}

/** Scores come from the API verbatim; the client never recounts. */
export function renderTally(tally: Tally): string {
  const rows = Object.entries(tally.per_option_scores)
    .map(([opt, n]) => `<tr><td>${esc(opt)}</td><td>${n}</td></tr>`)
    .join('');
  const o = tally.outcome;
  const verdict =
    o.kind === 'winner' ? `winner: ${o.option}` :
    o.kind === 'tie' ? `tie: ${o.options.join(', ')}` :
    o.kind.replace('_', ' ');
  return `<div class="tally${tally.provisional ? ' provisional' : ''}">
    <table>${rows}</table>
    <p class="outcome">${esc(verdict)}</p>
    <p class="turnout">${tally.ballots_cast} ballots,
      ${tally.abstentions} abstentions</p>
  </div>`;
}

// ---------------------------------------------------------------------------
// group homepage
// ---------------------------------------------------------------------------

export function renderGroupHomepage(group: Group, areas: Area[] = []): string {
  // announcements are stored oldest-first; the page shows newest first
  const announcements = [...group.announcements]
    .sort((a, b) => (a[0] < b[0] ? 1 : a[0] > b[0] ? -1 : 0))
    .map(([at, text]) => `<li><time>${esc(at)}</time> ${esc(text)}</li>`)
    .join('');
  const links = group.links
    .map(([label, url]) => `<li><a href="${esc(url)}">${esc(label)}</a></li>`)
    .join('');
  const areaList = areas
    .map(a => `<li><a data-area="${a.id}">${esc(a.name)}</a></li>`)
    .join('');
  return `<div class="group-home">
    <h1>${esc(group.name)}</h1>
    <p class="description">${esc(group.description)}</p>
    <section class="announcements"><h2>Announcements</h2>
      <ul>${announcements}</ul></section>
    <section class="links"><h2>Links</h2><ul>${links}</ul></section>
    <section class="areas"><h2>Meeting areas</h2><ul>${areaList}</ul></section>
  </div>`;
}

export function renderLockPage(groupName: string): string {
  return `<div class="locked">
    <h1>${esc(groupName)}</h1>
    <p>This group is closed. Membership is by invitation.</p>
  </div>`;
}

export function renderAccessDenied(): string {
  return `<div class="error403"><h1>Access denied</h1>
    <p>You do not have permission to view this meeting area.</p></div>`;
}

// ---------------------------------------------------------------------------
// tasks
// ---------------------------------------------------------------------------

export function renderTaskList(tasks: Task[]): string {
  const rows = tasks.map(
    task => `<tr data-task="${task.id}">
      <td>${esc(task.title)}</td>
      <td>${esc(task.priority)}</td>
      <td>${esc(task.status)}</td>
      <td>${esc(task.handler_names.join(', '))}</td>
      <td><button data-volunteer="${task.id}">Volunteer</button></td>
    </tr>`,
  );
  return `<table class="tasks">
    <thead><tr><th>Task</th><th>Priority</th><th>Status</th>
      <th>Handlers</th><th></th></tr></thead>
    <tbody>${rows.join('')}</tbody></table>`;
}

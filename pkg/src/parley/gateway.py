"""Email gateway: outbound notifications and posting by email.

Outbound: every posted comment or item fans out one message per eligible
subscriber (authors are never notified about their own posts).  Message-IDs
are deterministic, ``<evt-N@domain>`` for event sequence N, which makes
In-Reply-To resolvable on the way back in.

Inbound: the To local-part routes the post (``area-slug`` for a global
comment, ``area-slug+item-ID`` for an item comment); an In-Reply-To header
matching a known outbound Message-ID overrides the target to a reply.
Routing reuses ``post_comment`` so email and web posts are one write path.
"""

from __future__ import annotations

import email
import email.policy
import email.utils
import re
from dataclasses import dataclass, field
from datetime import datetime
from email.message import EmailMessage
from typing import Optional

from .errors import (
    AccessDenied,
    BadAddress,
    EmptyBody,
    UnknownArea,
    UnknownSender,
)
from .events import Event
from .model import Comment, CommentTarget, SYSTEM_USER_ID, TargetKind, ts_str
from .platform import Platform

ADDRESS_RE = re.compile(r"^([a-z0-9-]{1,64})(?:\+item-([0-9]+))?$")
MESSAGE_ID_RE = re.compile(r"^<evt-([0-9]+)@(.+)>$")
SIGNATURE_DELIMITER = "-- "
_RE_TOKEN = re.compile(r"^\s*(?:re:\s*|\[[^\]]*\]\s*)+", re.IGNORECASE)


@dataclass
class OutboundMessage:
    to: str
    subject: str
    body: str
    headers: dict = field(default_factory=dict)

    def as_rfc5322(self, from_addr: str) -> str:
        msg = EmailMessage()
        msg["From"] = from_addr
        msg["To"] = self.to
        msg["Subject"] = self.subject
        for name, value in self.headers.items():
            msg[name] = value
        msg.set_content(self.body)
        return msg.as_string()


@dataclass
class InboundPost:
    sender: int       # resolved UserId
    area: int
    target: CommentTarget
    subject: str
    body: str


class InMemoryTransport:
    """Test/deployment-default transport: captures messages in send order."""

    def __init__(self):
        self.sent: list = []

    def send(self, message: OutboundMessage) -> None:
        self.sent.append(message)


def message_id_for_seq(seq: int, domain: str) -> str:
    return f"<evt-{seq}@{domain}>"


def area_address(platform: Platform, area_id: int, domain: str,
                 item_id: Optional[int] = None) -> str:
    slug = platform.areas[area_id].slug
    if item_id is None:
        return f"{slug}@{domain}"
    return f"{slug}+item-{item_id}@{domain}"


def strip_subject(subject: str) -> str:
    return _RE_TOKEN.sub("", subject).strip()


def strip_signature(body: str) -> str:
    lines = body.split("\n")
    for i, line in enumerate(lines):
        if line.rstrip("\r") == SIGNATURE_DELIMITER:
            lines = lines[:i]
            break
    return "\n".join(lines).rstrip("\n")


class EmailGateway:
    """Bridges the platform's event stream and an email transport."""

    def __init__(self, platform: Platform, domain: str, transport=None):
        self.platform = platform
        self.domain = domain
        self.transport = transport if transport is not None else InMemoryTransport()

    def install(self) -> None:
        """Hook outbound fan-out onto live commits."""
        self.platform.set_notifier(self.on_event)

    # -- outbound ----------------------------------------------------------

    def on_event(self, platform: Platform, event: Event) -> None:
        for message in self.fan_out(event):
            self.transport.send(message)

    def fan_out(self, event: Event) -> list:
        area_id = event.data["area"]
        area = self.platform.areas[area_id]
        recipients = sorted(u for u in area.subscribers if u != event.actor)
        return [self.notification_for(event, u) for u in recipients]

    def notification_for(self, event: Event, subscriber: int) -> OutboundMessage:
        platform = self.platform
        area = platform.areas[event.data["area"]]
        group = platform.groups[area.owner_groups[0]]
        tag = f"[{group.slug}/{area.slug}] "
        headers = {
            "Message-ID": message_id_for_seq(event.seq, self.domain),
            "List-Id": f"<{area.slug}.{group.slug}.{self.domain}>",
        }

        if event.type == "comment_posted":
            comment = platform.comments[event.data["id"]]
            subject = tag + comment.subject
            token = self._reference_token(comment)
            reply_addr = area_address(platform, area.id, self.domain)
            if comment.target.kind is TargetKind.REPLY:
                parent = platform.comments[comment.target.ref]
                headers["In-Reply-To"] = message_id_for_seq(
                    parent.event_seq, self.domain)
            footer_lines = ["--"]
            if token:
                footer_lines.append(token)
            footer_lines.append(f"Reply by email to {reply_addr}")
            body = comment.body + "\n\n" + "\n".join(footer_lines)
        else:  # item posted: document, decision, or project
            item = platform.items[event.data["item_id"]]
            subject = tag + item.title
            reply_addr = area_address(platform, area.id, self.domain,
                                      item_id=item.id)
            body = (self._item_body(event) + "\n\n--\n"
                    f"{item.reference_token}\n"
                    f"Comment by email to {reply_addr}")
        return OutboundMessage(
            to=platform.users[subscriber].email,
            subject=subject, body=body, headers=headers)

    def _reference_token(self, comment: Comment) -> Optional[str]:
        target = comment.target
        if target.kind is TargetKind.ITEM:
            return self.platform.items[target.ref].reference_token
        if target.kind is TargetKind.REPLY:
            return self.platform.comments[target.ref].reference_token
        if target.kind is TargetKind.IN_TEXT:
            anchor = self.platform.anchors[target.ref]
            doc = self.platform.revisions[anchor.rev_id].doc
            return self.platform.items[doc].reference_token
        return None

    def _item_body(self, event: Event) -> str:
        if event.type == "document_posted":
            return event.data["body"]
        if event.type == "decision_created":
            return event.data["config"]["question"]
        return event.data["title"]

    # -- inbound -----------------------------------------------------------

    def parse_inbound(self, raw: str) -> InboundPost:
        msg = email.message_from_string(raw, policy=email.policy.default)
        _, from_addr = email.utils.parseaddr(msg.get("From", ""))
        sender = self.platform.users_by_email.get(from_addr)
        if sender is None:
            raise UnknownSender(f"no registered user for {from_addr!r}")

        local = self._our_local_part(msg)
        match = ADDRESS_RE.match(local)
        if not match:
            raise BadAddress(f"unroutable local part {local!r}")
        slug, item_ref = match.group(1), match.group(2)
        area = self._area_by_slug(slug)

        target = CommentTarget.area_global()
        if item_ref is not None:
            item = self.platform.items.get(int(item_ref))
            if item is None or item.area != area.id:
                raise BadAddress(f"no item {item_ref} in area {slug!r}")
            target = CommentTarget.item(item.id)
        reply_target = self._reply_target(msg)
        if reply_target is not None:
            target = reply_target

        subject = strip_subject(msg.get("Subject", ""))
        body = strip_signature(self._plain_body(msg))
        if not body.strip():
            raise EmptyBody("message has no usable text body")
        return InboundPost(sender=sender, area=area.id, target=target,
                           subject=subject, body=body)

    def _plain_body(self, msg) -> str:
        part = msg.get_body(preferencelist=("plain",))
        if part is None:
            raise EmptyBody("no plain-text body part")
        return part.get_content()

    def _our_local_part(self, msg) -> str:
        suffix = "@" + self.domain
        for _, addr in email.utils.getaddresses(msg.get_all("To", [])):
            if addr.endswith(suffix):
                return addr[:-len(suffix)]
        raise BadAddress(f"no recipient at {self.domain}")

    def _area_by_slug(self, slug: str):
        candidates = [a for a in self.platform.areas.values() if a.slug == slug]
        if not candidates:
            raise UnknownArea(f"no meeting area {slug!r}")
        return min(candidates, key=lambda a: a.id)

    def _reply_target(self, msg) -> Optional[CommentTarget]:
        ref = msg.get("In-Reply-To")
        if not ref:
            return None
        match = MESSAGE_ID_RE.match(ref.strip())
        if not match or match.group(2) != self.domain:
            return None
        seq = int(match.group(1))
        comment_id = self.platform.comment_by_event_seq.get(seq)
        if comment_id is None:
            return None
        return CommentTarget.reply_to(comment_id)

    def route_inbound(self, post: InboundPost, at: datetime) -> Comment:
        """Same write path as the web: delegates to post_comment."""
        return self.platform.post_comment(
            post.area, post.sender, post.subject or None, post.body,
            post.target, at, source="email")

    def handle_inbound(self, raw: str, at: datetime) -> Optional[Comment]:
        """Parse and route; on access denial, bounce to the sender instead."""
        post = self.parse_inbound(raw)
        try:
            return self.route_inbound(post, at)
        except AccessDenied:
            sender = self.platform.users[post.sender]
            area = self.platform.areas[post.area]
            self.transport.send(OutboundMessage(
                to=sender.email,
                subject="Delivery failed: posting not permitted",
                body=(f"Your message to {area.slug}@{self.domain} was not "
                      "posted: you are not a member of any group owning "
                      "this meeting area."),
                headers={"Message-ID": email.utils.make_msgid(domain=self.domain)},
            ))
            return None

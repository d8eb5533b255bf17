"""Record a deterministic API fixture for the frontend contract tests.

Builds a small but representative scenario through the real HTTP facade and
dumps every response the UI consumes into test/fixture.json. Re-run after
backend changes:

    python3 tools/record_fixture.py
"""

import json
import sys
from datetime import datetime, timedelta, timezone
from pathlib import Path

from fastapi.testclient import TestClient

from parley import Platform, ServiceConfig, create_app, hash_password

T0 = datetime(2026, 7, 1, 9, 0, tzinfo=timezone.utc)
OUT = Path(__file__).resolve().parent.parent / "test" / "fixture.json"


def main():
    platform = Platform()
    now = [T0]
    pw = hash_password("pw")
    for i, name in enumerate(("Ada", "Ben", "Cleo"), start=1):
        platform.register_user(name, f"{name.lower()}@fix.test", now[0],
                               password_hash=pw)
    app = create_app(platform, ServiceConfig(domain="fix.test"),
                     clock=lambda: now[0])
    client = TestClient(app)

    def login(email):
        r = client.post("/auth/login", json={"email": email, "password": "pw"})
        return {"Authorization": "Bearer " + r.json()["token"]}

    ada, ben = login("ada@fix.test"), login("ben@fix.test")

    g = client.post("/groups", json={"slug": "council", "name": "EPA Council"},
                    headers=ada).json()["id"]
    client.post(f"/groups/{g}/members", json={"user_id": 2}, headers=ada)
    client.post(f"/groups/{g}/members", json={"user_id": 3}, headers=ada)
    client.patch(f"/groups/{g}/homepage", json={
        "description": "Citizens' environmental council.",
        "announcements": [["2026-06-01T00:00:00+00:00", "Charter ratified"],
                          ["2026-07-01T00:00:00+00:00", "Budget vote opens"]],
        "links": [["Charter", "https://fix.test/charter"]],
    }, headers=ada)
    a = client.post(f"/groups/{g}/areas",
                    json={"slug": "budget", "name": "Budget"},
                    headers=ada).json()["id"]
    client.post(f"/groups/{g}/areas", json={"slug": "events", "name": "Events"},
                headers=ada)

    doc_resp = client.post(f"/areas/{a}/documents", json={
        "title": "Budget draft",
        "body": "Line one of the draft.\nSecond line with numbers.",
    }, headers=ada).json()
    doc, rev1 = doc_resp["id"], doc_resp["revisions"][0]
    now[0] += timedelta(minutes=1)
    anchor = client.post(f"/revisions/{rev1}/anchors",
                         json={"offset": 8, "body": "is this final?"},
                         headers=ben).json()
    now[0] += timedelta(minutes=1)
    c1 = client.post(f"/areas/{a}/comments", json={
        "subject": "Process question", "body": "When do we vote?",
        "target": {"kind": "item", "ref": doc}}, headers=ben).json()
    now[0] += timedelta(minutes=1)
    client.post(f"/areas/{a}/comments", json={
        "body": "Next week, see the decision item.",
        "target": {"kind": "reply", "ref": c1["id"]}}, headers=ada)
    now[0] += timedelta(minutes=1)
    client.post(f"/areas/{a}/comments", json={
        "subject": "Offtopic", "body": "Great weather for a meeting."},
        headers=ada)

    deadline = now[0] + timedelta(hours=2)
    dec = client.post(f"/areas/{a}/decisions", json={
        "question": "Adopt the budget draft?",
        "options": ["Yes", "No"],
        "method": "choose_one",
        "rule": {"kind": "supermajority", "fraction": "2/3"},
        "deadline": deadline.isoformat(),
    }, headers=ada).json()["id"]
    client.put(f"/decisions/{dec}/ballot",
               json={"content": {"kind": "one", "choice": "Yes"},
                     "annotation": "pending legal review"}, headers=ben)

    proj = client.post(f"/areas/{a}/projects", json={"title": "Cleanup Day"},
                       headers=ada).json()["id"]
    task = client.post(f"/projects/{proj}/tasks",
                       json={"title": "Book the hall", "priority": "P1"},
                       headers=ada).json()["id"]
    client.post(f"/tasks/{task}/volunteer", headers=ben)

    before = now[0].isoformat()
    fixture = {
        "now_before_deadline": before,
        "deadline": deadline.isoformat(),
        "group": client.get(f"/groups/{g}", headers=ada).json(),
        "area": client.get(f"/areas/{a}", headers=ada).json(),
        "index": {key: client.get(f"/areas/{a}/index",
                                  params={"sort": key}).json()
                  for key in ("subject", "item", "date", "author")},
        "document": client.get(f"/documents/{doc}/revisions/{rev1}",
                               params={"markers": "true"}).json(),
        "anchor": anchor,
        "decision_open": client.get(f"/decisions/{dec}", headers=ben).json(),
        "tally_open": client.get(f"/decisions/{dec}/tally").json(),
        "tasks": client.get(f"/projects/{proj}/tasks",
                            params={"sort": "priority"}).json(),
    }

    # past the deadline: close and record the final tally
    now[0] = deadline + timedelta(minutes=5)
    fixture["now_after_deadline"] = now[0].isoformat()
    ada = login("ada@fix.test")
    fixture["tally_final"] = client.post(f"/decisions/{dec}/close",
                                         headers=ada).json()
    fixture["decision_closed"] = client.get(f"/decisions/{dec}",
                                            headers=ada).json()

    OUT.write_text(json.dumps(fixture, indent=2, ensure_ascii=False) + "\n",
                   encoding="utf-8")
    print(f"wrote {OUT}", file=sys.stderr)


if __name__ == "__main__":
    main()

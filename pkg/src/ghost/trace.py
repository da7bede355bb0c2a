"""Append-only event log shared by the dispatcher, handlers, swapper and wrappers.

Events are plain dicts with a ``seq`` ordinal and a ``kind``:

* ``send``       depth, receiver class name, selector, outcome
* ``intercept``  proxy id, selector, action
* ``log``        text (forwarder and Transcript output)
* ``swap-out`` / ``swap-in``  graph id
* ``pre`` / ``exec`` / ``post``  wrapper bracketing records
"""

import json

SEND_OUTCOMES = ("executed", "primitive", "trapped-CI", "trapped-DNU", "identity-bypass")
INTERCEPTION_KINDS = ("intercept", "log", "swap-out", "swap-in", "pre", "exec", "post")


class Trace:
    def __init__(self, sends: bool = False):
        self.sends = sends
        self.events: list[dict] = []
        self.interceptions = 0

    def _append(self, kind, fields):
        event = {"seq": len(self.events), "kind": kind}
        event.update(fields)
        self.events.append(event)
        return event

    def record_send(self, depth, class_name, selector, outcome):
        if self.sends:
            self._append("send", {"depth": depth, "class": class_name,
                                  "selector": selector, "outcome": outcome})

    def record_interception(self, proxy_id, selector, action):
        self.interceptions += 1
        return self._append("intercept", {"proxy": proxy_id, "selector": selector, "action": action})

    def record(self, kind, **fields):
        return self._append(kind, fields)

    def of_kind(self, *kinds):
        return [e for e in self.events if e["kind"] in kinds]

    def sends_with(self, outcome):
        return [e for e in self.events if e["kind"] == "send" and e["outcome"] == outcome]

    def since(self, seq):
        return self.events[seq:]

    def mark(self) -> int:
        return len(self.events)

    def clear(self):
        self.events.clear()
        self.interceptions = 0

    def lines(self, mode="all-sends"):
        """Line-delimited JSON records for the sidecar trace file."""
        for event in self.events:
            if mode == "interceptions" and event["kind"] not in INTERCEPTION_KINDS:
                continue
            yield json.dumps(event, sort_keys=True)

"""Small builders shared across the test modules."""

import json

from privacyguard import LabeledRecord


def make_record(invasive=0, url="api.shop.example", req_type="GET", is_json=0, keys=()):
    return LabeledRecord(
        invasive=invasive,
        url=url,
        req_type=req_type,
        is_json=is_json,
        payload_keys=frozenset(keys),
    )


def har_text(entries):
    """Minimal HAR 1.2 document wrapping the given entry dicts."""
    return json.dumps({"log": {"version": "1.2", "entries": entries}})


def har_entry(url, method="GET", body=None, mime=None):
    request = {"method": method, "url": url, "headers": []}
    if mime is not None:
        request["headers"].append({"name": "Content-Type", "value": mime})
    if body is not None:
        request["postData"] = {"mimeType": mime or "application/json", "text": body}
    return {"request": request}

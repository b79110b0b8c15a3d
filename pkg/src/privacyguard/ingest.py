"""Capture ingestion and screening.

Turns recorded browser traffic (HAR 1.2 archives or files of saved curl
commands) into labeled dataset rows. Each outbound request gets a payload
profile, a two-stage screen (suspicious payload keys, unrelated destination),
and a recommended label. Rows the screen cannot decide are marked for human
review. The module also owns the dataset CSV dialect and the hosts-format
blocklist writer.
"""

from __future__ import annotations

import base64
import binascii
import ipaddress
import json
import re
import shlex
from dataclasses import dataclass
from urllib.parse import urlparse

from .errors import DataError

INVASIVE = "invasive"
BENIGN = "benign"
NEEDS_REVIEW = "needs-review"

#: invasive-column sentinel for rows awaiting a human label; rendered as "?"
NEEDS_LABEL = -1

#: payload keys that mark a request as suspicious when no override is given
DEFAULT_SUSPECT_KEYS = frozenset({"isprebid", "appid", "domain", "imp"})

BASE_COLUMNS = ("invasive", "url", "req_type", "is_json")

VERDICT_TO_CELL = {INVASIVE: 1, BENIGN: 0, NEEDS_REVIEW: NEEDS_LABEL}


class HarParseError(DataError):
    """The HAR document is not JSON or lacks the log.entries structure."""


class CurlParseError(DataError):
    """A line of the curl file cannot be understood as part of a command."""


class DatasetFormatError(DataError):
    """Dataset CSV text or records violate the CSV dialect."""


@dataclass(frozen=True)
class RawRequest:
    """One captured outbound HTTP request, before any labeling."""

    method: str
    url: str
    host: str
    content_type: str | None = None
    body: bytes | None = None
    source: str = "har"


@dataclass(frozen=True)
class PayloadProfile:
    """Shape summary of a request body: JSON or not, and its top-level keys."""

    is_json: bool
    top_level_keys: frozenset[str]


@dataclass(frozen=True)
class ScreenVerdict:
    """Outcome of the two-stage screen for one request."""

    suspicious_payload: bool
    unrelated_domain: bool
    recommended_label: str


@dataclass(frozen=True)
class LabeledRecord:
    """One dataset row: label, destination host, verb, JSON flag, payload keys.

    invasive is 0, 1, or NEEDS_LABEL for rows still awaiting review. The url
    field holds the destination host only; full URLs never reach the dataset.
    """

    invasive: int
    url: str
    req_type: str
    is_json: int
    payload_keys: frozenset[str] = frozenset()


def _host_of(url: str) -> str | None:
    """Lowercased host of an absolute URL, or None when there is no host."""
    try:
        parsed = urlparse(url)
    except ValueError:
        return None
    if not parsed.scheme or not parsed.hostname:
        return None
    return parsed.hostname.lower()


def parse_har(har_text: str) -> tuple[list[RawRequest], int]:
    """Parse a HAR 1.2 document into requests.

    Returns (requests, skipped) where skipped counts entries without a URL
    that parses into an absolute URL with a non-empty host. A document that
    is not JSON or has no log.entries array raises HarParseError.
    """
    try:
        doc = json.loads(har_text)
    except json.JSONDecodeError as exc:
        raise HarParseError(f"not valid JSON: {exc}") from exc
    log = doc.get("log") if isinstance(doc, dict) else None
    if not isinstance(log, dict):
        raise HarParseError("missing object at path 'log'")
    entries = log.get("entries")
    if not isinstance(entries, list):
        raise HarParseError("missing array at path 'log.entries'")

    requests: list[RawRequest] = []
    skipped = 0
    for entry in entries:
        req = entry.get("request") if isinstance(entry, dict) else None
        if not isinstance(req, dict):
            skipped += 1
            continue
        url = req.get("url")
        host = _host_of(url) if isinstance(url, str) else None
        if host is None:
            skipped += 1
            continue
        method = str(req.get("method") or "GET").strip().upper()
        content_type, body = _har_payload(req)
        requests.append(
            RawRequest(
                method=method,
                url=url,
                host=host,
                content_type=content_type,
                body=body,
                source="har",
            )
        )
    return requests, skipped


def _har_payload(req: dict) -> tuple[str | None, bytes | None]:
    """Content type and body bytes of a HAR request, if any."""
    content_type = None
    for header in req.get("headers") or []:
        if isinstance(header, dict) and str(header.get("name", "")).lower() == "content-type":
            content_type = str(header.get("value", "")) or None
            break
    post = req.get("postData")
    if not isinstance(post, dict):
        return content_type, None
    if content_type is None:
        mime = post.get("mimeType")
        content_type = str(mime) if mime else None
    text = post.get("text")
    if text is None:
        return content_type, None
    if post.get("encoding") == "base64":
        try:
            return content_type, base64.b64decode(text, validate=True)
        except (binascii.Error, ValueError):
            return content_type, None
    return content_type, str(text).encode("utf-8")


# curl flags whose argument we keep
_METHOD_FLAGS = ("-X", "--request")
_HEADER_FLAGS = ("-H", "--header")
_DATA_FLAGS = ("-d", "--data", "--data-raw", "--data-binary")
# flags whose argument must be consumed so it is not mistaken for the URL
_SKIP_ARG_FLAGS = frozenset(
    {
        "-A", "--user-agent",
        "-b", "--cookie",
        "-e", "--referer",
        "-m", "--max-time",
        "-o", "--output",
        "-u", "--user",
        "--connect-timeout",
        "--data-urlencode",
        "--retry",
    }
)


def parse_curl_file(text: str) -> list[RawRequest]:
    """Parse a file of saved curl commands into requests.

    Commands sit one per line or in blank-line-separated blocks, with
    trailing-backslash continuations joined first. Understands -X/--request,
    -H/--header, the --data family (multiple parts join with "&", and any
    data implies POST when no method is given), and the positional URL.
    Unknown switches are skipped; anything that cannot belong to a command
    raises CurlParseError naming the line.
    """
    requests = []
    for line_no, command in _split_commands(text):
        requests.append(_parse_curl_command(command, line_no))
    return requests


def _logical_lines(text: str) -> list[tuple[int, str]]:
    """Physical lines with trailing-backslash continuations joined."""
    out = []
    buf = ""
    buf_no = 0
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not buf:
            buf_no = no
        if line.endswith("\\"):
            buf += line[:-1].strip() + " "
            continue
        buf += line
        out.append((buf_no, buf.strip()))
        buf = ""
    if buf.strip():
        out.append((buf_no, buf.strip()))
    return out


def _split_commands(text: str) -> list[tuple[int, str]]:
    """Group logical lines into commands; a bare 'curl' line starts one."""
    commands: list[tuple[int, list[str]]] = []
    current: list[str] | None = None
    for no, line in _logical_lines(text):
        if not line or line.startswith("#"):
            current = None
            continue
        if line.split(maxsplit=1)[0] == "curl":
            current = [line]
            commands.append((no, current))
        elif current is not None:
            current.append(line)
        else:
            raise CurlParseError(f"line {no}: expected a curl command")
    return [(no, " ".join(parts)) for no, parts in commands]


def _flag_value(tokens: list[str], i: int, flag: str, line_no: int) -> tuple[str, int]:
    if i + 1 >= len(tokens):
        raise CurlParseError(f"line {line_no}: flag {flag} is missing its value")
    return tokens[i + 1], i + 2


def _parse_curl_command(command: str, line_no: int) -> RawRequest:
    try:
        tokens = shlex.split(command)
    except ValueError as exc:
        raise CurlParseError(f"line {line_no}: {exc}") from exc

    method: str | None = None
    headers: dict[str, str] = {}
    data_parts: list[str] = []
    url: str | None = None

    i = 1  # tokens[0] is "curl"
    while i < len(tokens):
        tok = tokens[i]
        value: str | None = None
        flag = tok
        if tok.startswith("--") and "=" in tok:
            flag, _, value = tok.partition("=")
        if flag in _METHOD_FLAGS:
            if value is None:
                value, i = _flag_value(tokens, i, flag, line_no)
            else:
                i += 1
            method = value
        elif tok.startswith("-X") and len(tok) > 2:
            method = tok[2:]
            i += 1
        elif flag in _HEADER_FLAGS:
            if value is None:
                value, i = _flag_value(tokens, i, flag, line_no)
            else:
                i += 1
            name, _, header_value = value.partition(":")
            headers[name.strip().lower()] = header_value.strip()
        elif flag in _DATA_FLAGS:
            if value is None:
                value, i = _flag_value(tokens, i, flag, line_no)
            else:
                i += 1
            data_parts.append(value)
        elif flag == "--url":
            if value is None:
                value, i = _flag_value(tokens, i, flag, line_no)
            else:
                i += 1
            url = url or value
        elif flag in _SKIP_ARG_FLAGS:
            if value is None:
                _, i = _flag_value(tokens, i, flag, line_no)
            else:
                i += 1
        elif flag.startswith("-"):
            i += 1  # unknown switch, assume it takes no argument
        else:
            if url is None and _host_of(tok) is not None:
                url = tok
            i += 1

    if url is None or _host_of(url) is None:
        raise CurlParseError(f"line {line_no}: no absolute URL with a host found")
    # curl itself switches to POST as soon as any data flag appears
    if method is None:
        method = "POST" if data_parts else "GET"
    body = "&".join(data_parts).encode("utf-8") if data_parts else None
    return RawRequest(
        method=method.strip().upper(),
        url=url,
        host=_host_of(url),
        content_type=headers.get("content-type"),
        body=body,
        source="curl-file",
    )


def profile_payload(req: RawRequest) -> PayloadProfile:
    """Summarize the request body.

    A body that decodes as a JSON object contributes its top-level keys. An
    array counts as JSON only when every element is an object, and the keys
    are the union over elements. Anything else (absent body, non-JSON bytes,
    scalars, mixed arrays) yields is_json=False and no keys.
    """
    if req.body is None:
        return PayloadProfile(False, frozenset())
    try:
        doc = json.loads(req.body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        return PayloadProfile(False, frozenset())
    if isinstance(doc, dict):
        return PayloadProfile(True, frozenset(str(k) for k in doc))
    if isinstance(doc, list) and all(isinstance(el, dict) for el in doc):
        keys: set[str] = set()
        for el in doc:
            keys.update(str(k) for k in el)
        return PayloadProfile(True, frozenset(keys))
    return PayloadProfile(False, frozenset())


def screen_request(
    req: RawRequest,
    profile: PayloadProfile,
    site_domain: str,
    suspect_keys: frozenset[str] = DEFAULT_SUSPECT_KEYS,
    related_domains: frozenset[str] = frozenset(),
) -> ScreenVerdict:
    """Two-stage screen for one request.

    Suspicious payload (any suspect key present) and an unrelated destination
    together recommend the invasive label; neither recommends benign; exactly
    one sends the request to human review. A destination is related when it
    equals the site domain, is a subdomain of it, or sits in related_domains.
    """
    site = site_domain.strip().lower()
    if not site:
        raise ValueError("site_domain must be non-empty")
    suspicious = bool(profile.top_level_keys & frozenset(suspect_keys))
    host = req.host.lower()
    related = (
        host == site
        or host.endswith("." + site)
        or host in {d.strip().lower() for d in related_domains}
    )
    unrelated = not related
    if suspicious and unrelated:
        label = INVASIVE
    elif not suspicious and not unrelated:
        label = BENIGN
    else:
        label = NEEDS_REVIEW
    return ScreenVerdict(suspicious, unrelated, label)


def record_from_request(req: RawRequest, profile: PayloadProfile, invasive: int) -> LabeledRecord:
    """Dataset row for a screened request; only the host survives as url."""
    return LabeledRecord(
        invasive=invasive,
        url=req.host,
        req_type=req.method,
        is_json=1 if profile.is_json else 0,
        payload_keys=profile.top_level_keys,
    )


def payload_columns(records) -> list[str]:
    """Sorted union of payload keys across records (the pl_ column order)."""
    keys: set[str] = set()
    for rec in records:
        keys.update(rec.payload_keys)
    return sorted(keys)


_CELL_BY_LABEL = {0: "0", 1: "1", NEEDS_LABEL: "?"}


def export_dataset_csv(records) -> str:
    """Render records as dataset CSV text.

    Columns are invasive,url,req_type,is_json followed by one pl_<key>
    indicator per payload key in sorted order. Cells are written unquoted,
    so commas or newlines inside values are refused rather than escaped.
    Rows awaiting review render their invasive cell as "?".
    """
    records = list(records)
    if not records:
        raise DatasetFormatError("refusing to export an empty dataset")
    keys = payload_columns(records)
    for value in keys + [r.url for r in records] + [r.req_type for r in records]:
        if "," in value or "\n" in value or "\r" in value:
            raise DatasetFormatError(f"value {value!r} cannot appear in an unquoted CSV")
    header = ",".join(BASE_COLUMNS + tuple("pl_" + k for k in keys))
    lines = [header]
    for rec in records:
        cell = _CELL_BY_LABEL.get(rec.invasive)
        if cell is None:
            raise DatasetFormatError(
                f"invasive must be 0, 1, or {NEEDS_LABEL}, got {rec.invasive!r}"
            )
        if rec.is_json not in (0, 1):
            raise DatasetFormatError(f"is_json must be 0 or 1, got {rec.is_json!r}")
        row = [cell, rec.url, rec.req_type, str(rec.is_json)]
        row += ["1" if k in rec.payload_keys else "0" for k in keys]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _parse_label_cell(cell: str, line_no: int) -> int:
    if cell == "?":
        return NEEDS_LABEL
    try:
        return int(cell)
    except ValueError:
        raise DatasetFormatError(f"row {line_no}: invasive cell {cell!r} is not an integer or '?'")


def _parse_binary_cell(cell: str, column: str, line_no: int) -> int:
    if cell == "0":
        return 0
    if cell == "1":
        return 1
    raise DatasetFormatError(f"row {line_no}: column {column} must be 0 or 1, got {cell!r}")


def parse_dataset_csv(text: str) -> list[LabeledRecord]:
    """Parse dataset CSV text back into records.

    The inverse of export_dataset_csv. The invasive cell accepts "?" and any
    integer; out-of-domain labels are passed through for clean_records to
    reject, everything else about the shape is enforced here.
    """
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise DatasetFormatError("empty CSV")
    header = lines[0].split(",")
    if tuple(header[: len(BASE_COLUMNS)]) != BASE_COLUMNS:
        raise DatasetFormatError(
            "header must start with " + ",".join(BASE_COLUMNS)
        )
    keys = []
    for col in header[len(BASE_COLUMNS):]:
        if not col.startswith("pl_") or len(col) == 3:
            raise DatasetFormatError(f"unexpected column {col!r}")
        keys.append(col[3:])

    records = []
    for no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise DatasetFormatError(
                f"row {no}: expected {len(header)} cells, got {len(cells)}"
            )
        payload = frozenset(
            key
            for key, cell in zip(keys, cells[len(BASE_COLUMNS):])
            if _parse_binary_cell(cell, "pl_" + key, no) == 1
        )
        records.append(
            LabeledRecord(
                invasive=_parse_label_cell(cells[0], no),
                url=cells[1],
                req_type=cells[2],
                is_json=_parse_binary_cell(cells[3], "is_json", no),
                payload_keys=payload,
            )
        )
    return records


_HOST_RE = re.compile(r"^[a-z0-9.-]+$")


def emit_blocklist(records, sink_address: str = "0.0.0.0") -> str:
    """Hosts-format blocklist of the invasive destinations.

    One "<sink> <host>" line per unique invasive host, sorted, trailing
    newline included. Hosts outside the lowercase hosts-file alphabet and
    sink addresses that are not IPv4 are refused.
    """
    try:
        ipaddress.IPv4Address(sink_address)
    except (ipaddress.AddressValueError, ValueError) as exc:
        raise DataError(f"invalid sink address {sink_address!r}") from exc
    domains = sorted({rec.url.lower() for rec in records if rec.invasive == 1})
    for domain in domains:
        if not _HOST_RE.match(domain):
            raise DataError(f"host {domain!r} does not fit the hosts-file grammar")
    return "".join(f"{sink_address} {domain}\n" for domain in domains)

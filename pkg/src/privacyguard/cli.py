"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data/file error, 3 server startup
failure. Reports go to stdout; warnings and errors go to stderr so piped
output stays clean.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path

from .bundle import (
    bundle_for_model,
    build_timestamp,
    dataset_fingerprint,
    load_bundle_file,
    model_from_bundle,
    save_bundle,
)
from .classifiers.logistic import train_logistic
from .classifiers.svm import SvmHyper, train_linear_svm
from .classifiers.tree import train_decision_tree
from .errors import DataError
from .evaluation import compute_metrics, confusion_matrix, metrics_report
from .features import (
    Dataset,
    build_schema,
    clean_records,
    encode_dataset,
    split_dataset,
)
from .ingest import (
    BENIGN,
    DEFAULT_SUSPECT_KEYS,
    INVASIVE,
    NEEDS_LABEL,
    NEEDS_REVIEW,
    VERDICT_TO_CELL,
    emit_blocklist,
    export_dataset_csv,
    parse_curl_file,
    parse_dataset_csv,
    parse_har,
    profile_payload,
    record_from_request,
    screen_request,
)


class UsageError(Exception):
    """Bad arguments; argparse's message with our exit code."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class CommandOutcome:
    exit_code: int
    report: str = ""


def _ratio_arg(text: str) -> float:
    """Accept either a decimal ('0.7') or a fraction ('2/3')."""
    try:
        if "/" in text:
            num, _, den = text.partition("/")
            value = float(num) / float(den)
        else:
            value = float(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"{text!r} is not a ratio")
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("ratio must be strictly between 0 and 1")
    return value


def _key_set(text: str) -> frozenset[str]:
    return frozenset(part.strip() for part in text.split(",") if part.strip())


def build_parser() -> _Parser:
    parser = _Parser(
        prog="privacyguard",
        description="Screen captured HTTP traffic and train request classifiers.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="turn a HAR or curl capture into a dataset CSV")
    p.add_argument("capture", help="path to the capture file")
    p.add_argument("--format", choices=("har", "curl"), required=True)
    p.add_argument("--site", required=True, help="first-party site domain, e.g. example.org")
    p.add_argument("--out", required=True, help="dataset CSV to write")
    p.add_argument(
        "--suspect-keys",
        type=_key_set,
        default=frozenset(DEFAULT_SUSPECT_KEYS),
        help="comma-separated payload keys that count as suspicious "
        f"(default: {','.join(sorted(DEFAULT_SUSPECT_KEYS))})",
    )
    p.add_argument(
        "--related",
        type=_key_set,
        default=frozenset(),
        help="comma-separated extra domains that count as first-party",
    )
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("label", help="interactively resolve rows marked '?'")
    p.add_argument("csv", help="dataset CSV to relabel in place")
    p.set_defaults(func=_cmd_label)

    p = sub.add_parser("train", help="train a classifier and write a model bundle")
    p.add_argument("csv", help="labeled dataset CSV")
    p.add_argument("--model", choices=("lr", "dt", "svm"), required=True)
    p.add_argument("--out", required=True, help="bundle file to write")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--ratio", type=_ratio_arg, default=0.7, help="train fraction (default 0.7)")
    p.add_argument("--stratify", action="store_true", help="split within each label group")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="score a bundle against a labeled CSV")
    p.add_argument("csv", help="labeled dataset CSV")
    p.add_argument("--bundle", required=True, help="model bundle to evaluate")
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("serve", help="serve prediction endpoints over HTTP")
    p.add_argument("--lr", help="logistic regression bundle")
    p.add_argument("--dt", help="decision tree bundle")
    p.add_argument("--svm", help="linear SVM bundle")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("blocklist", help="emit a hosts-format blocklist of invasive hosts")
    p.add_argument("csv", help="labeled dataset CSV")
    p.add_argument("--out", required=True, help="hosts file to write")
    p.add_argument("--sink", default="0.0.0.0", help="sink IPv4 address (default 0.0.0.0)")
    p.set_defaults(func=_cmd_blocklist)

    return parser


def _read_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _cmd_ingest(args) -> CommandOutcome:
    text = _read_text(args.capture)
    if args.format == "har":
        requests, skipped = parse_har(text)
    else:
        requests = parse_curl_file(text)
        skipped = 0
    if not requests:
        raise DataError(f"no usable requests in {args.capture}")

    counts: Counter = Counter()
    records = []
    for req in requests:
        profile = profile_payload(req)
        verdict = screen_request(req, profile, args.site, args.suspect_keys, args.related)
        counts[verdict.recommended_label] += 1
        records.append(record_from_request(req, profile, VERDICT_TO_CELL[verdict.recommended_label]))

    Path(args.out).write_text(export_dataset_csv(records), encoding="utf-8")
    report = (
        f"ingested {len(records)} requests ({skipped} skipped): "
        f"invasive={counts[INVASIVE]} benign={counts[BENIGN]} "
        f"needs-review={counts[NEEDS_REVIEW]}"
    )
    print(report)
    print(f"wrote {args.out}")
    return CommandOutcome(0, report)


def _cmd_label(args) -> CommandOutcome:
    records = parse_dataset_csv(_read_text(args.csv))
    pending = [i for i, rec in enumerate(records) if rec.invasive == NEEDS_LABEL]
    if not pending:
        print("no rows need review")
        return CommandOutcome(0, "no rows need review")

    for i in pending:
        rec = records[i]
        keys = ",".join(sorted(rec.payload_keys)) or "-"
        prompt = f"{rec.url} {rec.req_type} is_json={rec.is_json} keys={keys} invasive? [y/n] "
        while True:
            try:
                answer = input(prompt).strip().lower()
            except EOFError:
                raise DataError("labeling aborted before all rows were resolved; CSV left unchanged")
            if answer in ("y", "yes"):
                records[i] = replace(rec, invasive=1)
                break
            if answer in ("n", "no"):
                records[i] = replace(rec, invasive=0)
                break
            print("please answer y or n", file=sys.stderr)

    Path(args.csv).write_text(export_dataset_csv(records), encoding="utf-8")
    report = f"labeled {len(pending)} rows"
    print(report)
    return CommandOutcome(0, report)


def _load_clean_records(path: str):
    records = parse_dataset_csv(_read_text(path))
    cleaned, report = clean_records(records)
    if report.duplicates_removed or report.normalized or report.rejected:
        print(
            f"cleaned {len(records)} records: kept {len(cleaned)} "
            f"(duplicates_removed={report.duplicates_removed} "
            f"normalized={report.normalized} rejected={report.rejected})",
            file=sys.stderr,
        )
    unresolved = sum(1 for rec in cleaned if rec.invasive == NEEDS_LABEL)
    if unresolved:
        raise DataError(
            f"{unresolved} rows are still marked '?'; run the label command first"
        )
    return cleaned


def _cmd_train(args) -> CommandOutcome:
    cleaned = _load_clean_records(args.csv)
    if len(cleaned) < 2:
        raise DataError("need at least 2 labeled records to train")
    schema = build_schema(cleaned)
    dataset, _ = encode_dataset(cleaned, schema)
    split = split_dataset(dataset, args.ratio, args.seed, stratify=args.stratify)
    print(f"train={len(split.x_train)} test={len(split.x_test)}")

    if args.model == "lr":
        model = train_logistic(split.x_train, split.y_train)
    elif args.model == "dt":
        model = train_decision_tree(split.x_train, split.y_train)
    else:
        model = train_linear_svm(split.x_train, split.y_train, SvmHyper(seed=args.seed))
    model.schema_hash = schema.schema_hash

    bundle = bundle_for_model(
        model,
        schema,
        created_at=build_timestamp(),
        training_fingerprint=dataset_fingerprint(dataset.x, dataset.y),
        extra_hyper={
            "split_seed": args.seed,
            "split_ratio": args.ratio,
            "split_stratify": args.stratify,
        },
    )
    Path(args.out).write_bytes(save_bundle(bundle))
    print(f"wrote {args.out}")
    return CommandOutcome(0, f"train={len(split.x_train)} test={len(split.x_test)}")


def _cmd_evaluate(args) -> CommandOutcome:
    cleaned = _load_clean_records(args.csv)
    if not cleaned:
        raise DataError("no labeled records to evaluate")
    bundle = load_bundle_file(args.bundle)
    model = model_from_bundle(bundle)
    dataset, enc_report = encode_dataset(cleaned, bundle.schema)
    if enc_report.unseen_count:
        print(
            f"note: {enc_report.unseen_count} payload-key sightings have no schema column "
            f"({', '.join(sorted(enc_report.unseen_keys))}); they are ignored",
            file=sys.stderr,
        )

    eval_x, eval_y = dataset.x, dataset.y
    if dataset_fingerprint(dataset.x, dataset.y) == bundle.training_fingerprint:
        seed = bundle.hyper.get("split_seed")
        ratio = bundle.hyper.get("split_ratio")
        if seed is not None and ratio is not None:
            print(
                "warning: this CSV is the bundle's training data; evaluating only the "
                "recorded held-out test split to avoid train/test contamination",
                file=sys.stderr,
            )
            split = split_dataset(
                Dataset(bundle.schema, dataset.x, dataset.y),
                float(ratio),
                int(seed),
                stratify=bool(bundle.hyper.get("split_stratify", False)),
            )
            eval_x, eval_y = split.x_test, split.y_test
        else:
            print(
                "warning: this CSV is the bundle's training data and the bundle records "
                "no split; scores below are contaminated",
                file=sys.stderr,
            )

    predictions = [model.predict(vector) for vector in eval_x]
    cm = confusion_matrix(eval_y, predictions)
    report = metrics_report(bundle.model_kind, cm, compute_metrics(cm))
    text = json.dumps(report, indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    return CommandOutcome(0, text)


def _cmd_serve(args) -> CommandOutcome:
    from . import service  # imported lazily, fastapi is heavy
    import uvicorn

    paths = {
        kind: path
        for kind, path in (("lr", args.lr), ("dt", args.dt), ("svm", args.svm))
        if path
    }
    if not paths:
        raise UsageError("serve needs at least one of --lr/--dt/--svm")
    models = service.load_models(paths)
    app = service.create_app(models)
    print(f"serving {', '.join(sorted(models))} on {args.host}:{args.port}")
    try:
        uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    except SystemExit as exc:
        if exc.code:
            print(f"error: server failed to start on {args.host}:{args.port}", file=sys.stderr)
            return CommandOutcome(3, "server failed to start")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CommandOutcome(3, str(exc))
    return CommandOutcome(0)


def _cmd_blocklist(args) -> CommandOutcome:
    records = parse_dataset_csv(_read_text(args.csv))
    text = emit_blocklist(records, args.sink)
    Path(args.out).write_text(text, encoding="utf-8")
    count = len(text.splitlines())
    report = f"wrote {count} blocked hosts to {args.out}"
    print(report)
    return CommandOutcome(0, report)


def run_command(argv) -> CommandOutcome:
    """Run one CLI invocation and report its outcome instead of exiting."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return CommandOutcome(1, str(exc))
    except SystemExit as exc:  # argparse exits itself for --help
        return CommandOutcome(0 if not exc.code else 1)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return CommandOutcome(1, str(exc))
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CommandOutcome(2, str(exc))


def main() -> None:
    raise SystemExit(run_command(sys.argv[1:]).exit_code)


if __name__ == "__main__":
    main()

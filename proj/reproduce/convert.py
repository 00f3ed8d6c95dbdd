#!/usr/bin/env python3
"""Convert public COVID-19 news corpora into crossfake JSONL.

English training sources: ReCOVery, CoAID and FakeCovid (English rows only).
Chinese test source: a CSV or JSON/JSONL file with title, body and label columns.
Rows without body text are dropped; duplicate bodies are kept once.
"""

import argparse
import csv
import glob
import hashlib
import json
import os
import sys

csv.field_size_limit(sys.maxsize)


def read_csv(path):
    with open(path, newline="", encoding="utf-8", errors="replace") as f:
        yield from csv.DictReader(f)


def pick(row, *names):
    for name in names:
        value = row.get(name)
        if value and value.strip():
            return value.strip()
    return ""


def recovery(path):
    # reliability: 1 = reliable (real), 0 = unreliable (fake)
    for row in read_csv(path):
        rel = pick(row, "reliability")
        if rel not in ("0", "1"):
            continue
        yield {
            "title": pick(row, "title"),
            "body": pick(row, "body_text"),
            "label": 1 if rel == "0" else 0,
            "source_url": pick(row, "url"),
            "published_at": pick(row, "publish_date")[:10],
        }


def coaid(root):
    for path in sorted(glob.glob(os.path.join(root, "*", "News*COVID-19*.csv"))):
        name = os.path.basename(path)
        if "tweets" in name.lower() or "replies" in name.lower():
            continue
        label = 1 if "Fake" in name else 0
        for row in read_csv(path):
            yield {
                "title": pick(row, "title", "newstitle"),
                "body": pick(row, "content", "abstract"),
                "label": label,
                "source_url": pick(row, "news_url"),
                "published_at": pick(row, "publish_date")[:10],
            }


FAKECOVID_FAKE = {"false", "misleading", "partially false", "mostly false", "pants on fire!"}
FAKECOVID_REAL = {"true", "mostly true", "correct"}


def fakecovid(path):
    for row in read_csv(path):
        if pick(row, "lang").lower() not in ("en", "english"):
            continue
        verdict = pick(row, "class").lower()
        if verdict in FAKECOVID_FAKE:
            label = 1
        elif verdict in FAKECOVID_REAL:
            label = 0
        else:
            continue
        yield {
            "title": pick(row, "title", "source_title"),
            "body": pick(row, "content_text", "article_text", "content"),
            "label": label,
            "source_url": pick(row, "ref_source", "article_source", "url"),
        }


def chinese(path, title_col, body_col, label_col):
    if path.endswith(".csv"):
        rows = list(read_csv(path))
    elif path.endswith(".jsonl"):
        with open(path, encoding="utf-8") as f:
            rows = [json.loads(line) for line in f if line.strip()]
    else:
        with open(path, encoding="utf-8") as f:
            rows = json.load(f)
    for row in rows:
        row = {k: str(v) if v is not None else "" for k, v in row.items()}
        raw = pick(row, label_col).lower()
        label = {"1": 1, "fake": 1, "false": 1, "0": 0, "real": 0, "true": 0}.get(raw)
        if label is None:
            continue
        yield {"title": pick(row, title_col), "body": pick(row, body_col), "label": label}


def write(records, out, language, prefix):
    seen = set()
    kept = 0
    with open(out, "w", encoding="utf-8") as f:
        for rec in records:
            if not rec.get("body"):
                continue
            digest = hashlib.sha256(rec["body"].encode("utf-8")).hexdigest()
            if digest in seen:
                continue
            seen.add(digest)
            rec = {k: v for k, v in rec.items() if v not in ("", None)}
            if len(rec.get("published_at", "")) != 10:
                rec.pop("published_at", None)
            rec.update(id=f"{prefix}-{kept:05d}", language=language)
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")
            kept += 1
    print(f"{out}: {kept} articles", file=sys.stderr)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True)
    en = sub.add_parser("english")
    en.add_argument("--recovery")
    en.add_argument("--coaid-dir")
    en.add_argument("--fakecovid")
    en.add_argument("--out", required=True)
    zh = sub.add_parser("chinese")
    zh.add_argument("--input", required=True)
    zh.add_argument("--title-col", default="title")
    zh.add_argument("--body-col", default="content")
    zh.add_argument("--label-col", default="label")
    zh.add_argument("--out", required=True)
    args = ap.parse_args()

    if args.cmd == "english":
        def sources():
            if args.recovery:
                yield from recovery(args.recovery)
            if args.coaid_dir:
                yield from coaid(args.coaid_dir)
            if args.fakecovid:
                yield from fakecovid(args.fakecovid)
        write(sources(), args.out, "en", "en")
    else:
        write(chinese(args.input, args.title_col, args.body_col, args.label_col), args.out, "zh", "zh")


if __name__ == "__main__":
    main()

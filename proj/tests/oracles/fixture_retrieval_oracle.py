#!/usr/bin/env python3
"""Brute-force reference for the sentence-retrieval diagnostic.

Written independently of the C++ library (regex tokenizer, regex sentence
splitter, scorers straight from their textbook definitions) and used once to
freeze the expected per-item hit lists for the bundled fixture into
tests/acceptance/fixture_expectations.hpp.

Usage: fixture_retrieval_oracle.py fixtures/parallelqa_pilot.json
"""

import json
import math
import re
import sys
from collections import Counter

ABBREV = {
    "mr", "mrs", "ms", "dr", "prof", "rev", "hon", "st", "jr", "sr", "gen", "col", "lt", "capt",
    "cmdr", "sgt", "maj", "adm", "gov", "sen", "rep", "pres", "sec", "amb", "no", "nos", "vol",
    "vs", "etc", "inc", "ltd", "co", "corp", "bros", "mt", "ft", "ave", "blvd", "jan", "feb",
    "mar", "apr", "aug", "sept", "sep", "oct", "nov", "dec", "u.s", "u.k", "u.n", "e.g", "i.e",
    "a.m", "p.m", "fig", "approx", "dept",
}

TOKEN = re.compile(r"[A-Za-z0-9]+(?:['’][A-Za-z0-9]+)*")
BOUNDARY = re.compile(r"[.?!][\"')\]”’»]*(?=\s+[\"'(\[“‘«]*[A-Z0-9])")


def tokens(text):
    return [m.group(0).lower() for m in TOKEN.finditer(text)]


def is_abbrev(text, dot):
    m = re.search(r"[A-Za-z0-9.]*$", text[:dot])
    word = m.group(0).lstrip(".")
    if re.fullmatch(r"[A-Z](\.[A-Za-z])*", word):
        return True
    return word.lower() in ABBREV


def sentences(text):
    spans = []
    start = len(text) - len(text.lstrip())
    for m in BOUNDARY.finditer(text):
        if m.start() < start:
            continue
        if text[m.start()] == "." and is_abbrev(text, m.start()):
            continue
        spans.append((start, m.end()))
        rest = text[m.end():]
        start = m.end() + (len(rest) - len(rest.lstrip()))
    spans.append((start, len(text.rstrip())))
    return spans


def jaccard(q, s):
    a, b = set(q), set(s)
    return len(a & b) / len(a | b) if (a | b) else 0.0


def tfidf_cos(q, s, docs):
    n = len(docs)
    df = Counter(t for d in docs for t in set(d))

    def vec(toks):
        return {t: c * math.log((n + 1) / (df[t] + 1)) for t, c in Counter(toks).items()}

    vq, vs = vec(q), vec(s)
    nq = math.sqrt(sum(w * w for w in vq.values()))
    ns = math.sqrt(sum(w * w for w in vs.values()))
    if nq == 0 or ns == 0:
        return 0.0
    return sum(vq[t] * vs.get(t, 0.0) for t in vq) / (nq * ns)


def bm25(q, s, docs, k1=1.2, b=0.75):
    n = len(docs)
    avg = sum(len(d) for d in docs) / n
    df = Counter(t for d in docs for t in set(d))
    tf = Counter(s)
    total = 0.0
    for t in q:  # one summand per query occurrence
        if tf[t] == 0:
            continue
        idf = math.log(1 + (n - df[t] + 0.5) / (df[t] + 0.5))
        total += idf * tf[t] * (k1 + 1) / (tf[t] + k1 * (1 - b + b * len(s) / avg))
    return total


def main(path):
    data = json.load(open(path, encoding="utf-8"))
    results = {"jaccard": [], "tfidf": [], "bm25": []}
    for pair in data["pairs"]:
        a, b = pair["passage_a"]["text"], pair["passage_b"]["text"]
        spans = sentences(a) + [(s + len(a) + 1, e + len(a) + 1) for s, e in sentences(b)]
        text = a + "\n" + b
        sent_toks = [tokens(text[s:e]) for s, e in spans]
        for qa in pair["qas"]:
            q = tokens(qa["question"])
            for metric in results:
                if metric == "jaccard":
                    scores = [jaccard(q, s) for s in sent_toks]
                elif metric == "tfidf":
                    scores = [tfidf_cos(q, s, sent_toks) for s in sent_toks]
                else:
                    scores = [bm25(q, s, sent_toks) for s in sent_toks]
                best = max(range(len(scores)), key=lambda i: (scores[i], -i))
                hit = False
                for ans in qa["answers"]:
                    start = ans["char_start"] + (len(a) + 1 if ans["passage_index"] == 1 else 0)
                    end = start + len(ans["text"])
                    s, e = spans[best]
                    hit = hit or (start < e and s < end)
                results[metric].append((qa["id"], best, hit))
    for metric, rows in results.items():
        hits = sum(h for _, _, h in rows)
        print(f"{metric}: {hits}/{len(rows)}")
        for qa_id, best, hit in sorted(rows):
            print(f"  {qa_id:18s} top={best:2d} hit={int(hit)}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "fixtures/parallelqa_pilot.json")

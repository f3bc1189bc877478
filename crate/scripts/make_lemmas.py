#!/usr/bin/env python3
"""Write a `word<TAB>pos<TAB>lemma` table for the words of a corpus.

Lemmas come from the WordNet-derived English tables shipped in the
`spacy-lookups-data` package (exception lists, lemma index and suffix
rules per part of speech). Only noun, verb and adjective lemmas that
differ from the surface form are written.

    pip install spacy-lookups-data
    python scripts/make_lemmas.py corpus.txt --min-count 5 -o lemmas.tsv
"""

import argparse
import collections
import gzip
import json
import os
import re
import sys

POS = ("noun", "verb", "adj")


def load_tables():
    import spacy_lookups_data

    root = os.path.join(os.path.dirname(spacy_lookups_data.__file__), "data")

    def load(name):
        with gzip.open(os.path.join(root, f"en_{name}.json.gz"), "rt", encoding="utf-8") as f:
            return json.load(f)

    index = {p: set(v) for p, v in load("lemma_index").items()}
    return load("lemma_exc"), index, load("lemma_rules")


def lemmatize(word, pos, exc, index, rules):
    forms = exc[pos].get(word)
    if forms:
        return forms[0]
    if word in index[pos]:
        return word
    for old, new in rules[pos]:
        if word.endswith(old):
            form = word[: len(word) - len(old)] + new
            if form and form in index[pos]:
                return form
    return None


def tokens(path):
    with open(path, encoding="utf-8", errors="replace") as f:
        for line in f:
            for raw in line.split():
                tok = re.sub(r"^\W+|\W+$", "", raw).lower()
                if tok:
                    yield tok


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("corpus", nargs="+")
    ap.add_argument("--min-count", type=int, default=5)
    ap.add_argument("-o", "--out", default="-")
    args = ap.parse_args()

    counts = collections.Counter()
    for path in args.corpus:
        counts.update(tokens(path))
    exc, index, rules = load_tables()

    out = sys.stdout if args.out == "-" else open(args.out, "w", encoding="utf-8")
    out.write("# word\tpos\tlemma (WordNet 3.0 tables via spacy-lookups-data)\n")
    rows = 0
    for word in sorted(w for w, c in counts.items() if c >= args.min_count):
        for pos in POS:
            lemma = lemmatize(word, pos, exc, index, rules)
            if lemma and lemma != word:
                out.write(f"{word}\t{pos}\t{lemma}\n")
                rows += 1
    if out is not sys.stdout:
        out.close()
    print(f"{rows} lemma rows for {len(counts)} word types", file=sys.stderr)


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Emits NFKC test vectors (input/expected codepoint lists, hex, tab
separated) produced by the host Python unicodedata module."""

import random
import sys
import unicodedata

CURATED = [
    "ﬁnal",              # fi ligature
    "Ｈｅｌｌｏ",  # fullwidth HELLO
    "Ĳsselmeer",          # IJ digraph
    "é",                # e + combining acute -> é
    "ȩ́",          # cedilla + acute ordering
    "q̣̇",          # reorder dot-below before dot-above
    "ṩ",                  # s with dot below and above
    "क़",                  # composition exclusion (qa -> ka + nukta stays apart)
    "각",                  # Hangul syllable
    "각",      # Hangul jamo -> syllable
    "㎄",                  # SQUARE KA -> "kA"... compat
    "Ⅳ",                  # roman numeral four
    "ﷺ",                  # Arabic ligature sallallahou
    "ﺍﺎ",            # Arabic presentation forms alef
    "۱۲۳",      # extended Arabic-Indic digits (NFKC-stable)
    "١٢",            # Arabic-Indic digits
    "½ cup",              # vulgar fraction
    "①②",            # circled digits
    " space",             # nbsp -> space
    "x᠋̀",           # variation selector with mark
    "İ",                  # I with dot above (stable)
    "à̖̀",     # mixed ccc
    "",
]


def dump(s: str) -> str:
    return " ".join("%X" % ord(c) for c in s)


def main(out_path: str) -> None:
    rng = random.Random(20240042)
    pool = []
    # interesting codepoint pools: compat chars, combining marks, hangul, ascii
    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        ch = chr(cp)
        if unicodedata.normalize("NFKC", ch) != ch:
            pool.append(cp)
    marks = [cp for cp in range(0x300, 0x370)]
    hangul = list(range(0x1100, 0x1113)) + list(range(0x1161, 0x1176)) + list(range(0x11A8, 0x11C3))
    ascii_ = list(range(0x20, 0x7F))

    cases = list(CURATED)
    for _ in range(400):
        n = rng.randint(1, 12)
        s = []
        for _ in range(n):
            r = rng.random()
            if r < 0.35:
                s.append(chr(rng.choice(pool)))
            elif r < 0.55:
                s.append(chr(rng.choice(marks)))
            elif r < 0.7:
                s.append(chr(rng.choice(hangul)))
            else:
                s.append(chr(rng.choice(ascii_)))
        cases.append("".join(s))

    with open(out_path, "w", encoding="utf-8") as f:
        for case in cases:
            f.write("%s\t%s\n" % (dump(case), dump(unicodedata.normalize("NFKC", case))))
    print("wrote %d cases" % len(cases))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/golden/nfkc_cases.tsv")

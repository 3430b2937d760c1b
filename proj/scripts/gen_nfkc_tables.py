#!/usr/bin/env python3
"""Generates src/tokenizer/nfkc_data.cpp from the host Python unicodedata
module: full compatibility decompositions (Hangul excluded, handled
algorithmically at runtime), nonzero canonical combining classes, and
canonical composition pairs."""

import sys
import unicodedata

HANGUL_BASE = 0xAC00
HANGUL_END = 0xD7A3


def main(out_path: str) -> None:
    decomp = {}  # cp -> list[int], full NFKD expansion
    ccc = {}  # cp -> combining class (nonzero only)
    comp = {}  # (a, b) -> composed cp

    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        ch = chr(cp)
        cls = unicodedata.combining(ch)
        if cls:
            ccc[cp] = cls
        if HANGUL_BASE <= cp <= HANGUL_END:
            continue
        full = unicodedata.normalize("NFKD", ch)
        if full != ch:
            decomp[cp] = [ord(c) for c in full]
        raw = unicodedata.decomposition(ch)
        if raw and not raw.startswith("<"):
            parts = [int(x, 16) for x in raw.split()]
            if len(parts) == 2:
                # Included iff the pair recomposes under NFC (this folds in
                # the composition-exclusion list automatically).
                if unicodedata.normalize("NFC", unicodedata.normalize("NFD", ch)) == ch:
                    comp[(parts[0], parts[1])] = cp

    pool = []
    keys = sorted(decomp)
    offsets = []
    for cp in keys:
        offsets.append(len(pool))
        pool.extend(decomp[cp])
    offsets.append(len(pool))

    ccc_keys = sorted(ccc)
    comp_keys = sorted(comp)

    def fmt(values, per_line=12):
        lines = []
        for i in range(0, len(values), per_line):
            lines.append("    " + ", ".join(str(v) for v in values[i : i + per_line]) + ",")
        return "\n".join(lines)

    with open(out_path, "w", encoding="utf-8") as f:
        f.write(
            "// Generated by scripts/gen_nfkc_tables.py (Unicode %s). Do not edit.\n"
            "#include \"embedkit/tokenizer/nfkc.hpp\"\n\n"
            "#include <cstdint>\n\n"
            "namespace embedkit::tok::nfkc_data {\n\n" % unicodedata.unidata_version
        )
        f.write("const std::size_t kDecompCount = %d;\n" % len(keys))
        f.write("const std::uint32_t kDecompKeys[] = {\n%s\n};\n" % fmt(keys))
        f.write("const std::uint32_t kDecompOffsets[] = {\n%s\n};\n" % fmt(offsets))
        f.write("const std::uint32_t kDecompPool[] = {\n%s\n};\n\n" % fmt(pool))
        f.write("const std::size_t kCccCount = %d;\n" % len(ccc_keys))
        f.write("const std::uint32_t kCccKeys[] = {\n%s\n};\n" % fmt(ccc_keys))
        f.write(
            "const std::uint8_t kCccValues[] = {\n%s\n};\n\n"
            % fmt([ccc[k] for k in ccc_keys])
        )
        f.write("const std::size_t kCompCount = %d;\n" % len(comp_keys))
        f.write(
            "const std::uint64_t kCompKeys[] = {\n%s\n};\n"
            % fmt([(a << 21) | b for a, b in comp_keys])
        )
        f.write(
            "const std::uint32_t kCompValues[] = {\n%s\n};\n\n"
            % fmt([comp[k] for k in comp_keys])
        )
        f.write("}  // namespace embedkit::tok::nfkc_data\n")

    print(
        "decomp entries: %d (pool %d), ccc: %d, comp pairs: %d"
        % (len(keys), len(pool), len(ccc_keys), len(comp_keys))
    )


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/tokenizer/nfkc_data.cpp")

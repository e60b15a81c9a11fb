#!/usr/bin/env python3
"""Regenerates include/alpdc/unicode_tables.hpp from Python's unicodedata."""
import sys
import unicodedata

MAX_CP = 0x30000


def ranges(pred):
    out = []
    start = None
    for cp in range(MAX_CP + 1):
        ok = cp <= MAX_CP - 1 and pred(cp)
        if ok and start is None:
            start = cp
        elif not ok and start is not None:
            out.append((start, cp - 1))
            start = None
    return out


def is_surrogate(cp):
    return 0xD800 <= cp <= 0xDFFF


def main(path):
    lower = []
    for cp in range(MAX_CP):
        if is_surrogate(cp):
            continue
        low = chr(cp).lower()
        if len(low) == 1 and ord(low) != cp:
            lower.append((cp, ord(low)))

    compose = []
    for cp in range(MAX_CP):
        if is_surrogate(cp):
            continue
        d = unicodedata.decomposition(chr(cp))
        if not d or d.startswith("<"):
            continue
        parts = [int(p, 16) for p in d.split()]
        if len(parts) != 2:
            continue
        if unicodedata.normalize("NFC", chr(parts[0]) + chr(parts[1])) == chr(cp):
            compose.append((parts[0], parts[1], cp))
    compose.sort()

    ccc = [(cp, unicodedata.combining(chr(cp))) for cp in range(MAX_CP)
           if not is_surrogate(cp) and unicodedata.combining(chr(cp))]

    punct = ranges(lambda cp: not is_surrogate(cp)
                   and unicodedata.category(chr(cp)).startswith("P"))
    digits = ranges(lambda cp: not is_surrogate(cp)
                    and unicodedata.category(chr(cp)) == "Nd")

    with open(path, "w", encoding="utf-8") as f:
        w = f.write
        w("// Generated by tools/gen_unicode_tables.py (Unicode %s). Do not edit.\n"
          % unicodedata.unidata_version)
        w("#pragma once\n\n#include <array>\n#include <cstdint>\n\n")
        w("namespace alpdc::unicode::tables {\n\n")
        w("struct CaseMapping { char32_t from; char32_t to; };\n")
        w("struct Composition { char32_t first; char32_t second; char32_t composed; };\n")
        w("struct CombiningClass { char32_t cp; std::uint8_t ccc; };\n")
        w("struct Range { char32_t lo; char32_t hi; };\n\n")

        def emit(name, typ, rows, fmt):
            w("inline constexpr std::array<%s, %d> %s{{\n" % (typ, len(rows), name))
            for i in range(0, len(rows), 4):
                w("    " + " ".join(fmt(r) + "," for r in rows[i:i + 4]) + "\n")
            w("}};\n\n")

        emit("kLowercase", "CaseMapping", lower,
             lambda r: "{0x%04X, 0x%04X}" % r)
        emit("kCompositions", "Composition", compose,
             lambda r: "{0x%04X, 0x%04X, 0x%04X}" % r)
        emit("kCombiningClass", "CombiningClass", ccc,
             lambda r: "{0x%04X, %d}" % r)
        emit("kPunctuation", "Range", punct, lambda r: "{0x%04X, 0x%04X}" % r)
        emit("kDecimalDigits", "Range", digits, lambda r: "{0x%04X, 0x%04X}" % r)
        w("}  // namespace alpdc::unicode::tables\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "include/alpdc/unicode_tables.hpp")

#!/usr/bin/env python3
# Copyright 2026 The pernorm Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates the bundled Unicode tables from UCD 14.0.0.

Requires `pip install unicodedata2==14.0.0`. Writes:

  include/pernorm/detail/unicode_tables.inc   tables compiled into the library
  data/grammars/visual_common.rules           shared visual rules (NFKC folds)
  tests/data/UnicodeData-arabic.txt           UnicodeData.txt lines, Arabic blocks
  tests/data/CompositionExclusions-arabic.txt exclusions within those blocks
  tests/data/nfc_reference.tsv                NFC samples from unicodedata2
"""

import os
import random
import sys

import unicodedata2 as ucd

if ucd.unidata_version != "14.0.0":
    sys.exit("expected UCD 14.0.0, got " + ucd.unidata_version)

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

ARABIC_RANGES = [
    (0x0600, 0x06FF),
    (0x0750, 0x077F),
    (0x08A0, 0x08FF),
    (0xFB50, 0xFDFF),
    (0xFE70, 0xFEFF),
]
PRESENTATION_RANGES = [(0xFB50, 0xFDFF), (0xFE70, 0xFEFF)]

WAW = 0x0648
U_LETTER = 0x06C7
WAW_MARKS = [0x064F, 0x0619]  # damma, small damma


def assigned(ranges):
    for lo, hi in ranges:
        for cp in range(lo, hi + 1):
            if ucd.category(chr(cp)) != "Cn":
                yield cp


def hexseq(cps):
    return " ".join("%04X" % c for c in cps)


def canonical_pair(cp):
    d = ucd.decomposition(chr(cp))
    if not d or d.startswith("<"):
        return None
    parts = [int(x, 16) for x in d.split()]
    return parts


def write_tables():
    ccc = []
    canon = []
    compat = []
    excluded = []
    for cp in assigned(ARABIC_RANGES):
        ch = chr(cp)
        if ucd.combining(ch):
            ccc.append((cp, ucd.combining(ch)))
        parts = canonical_pair(cp)
        if parts is not None:
            if len(parts) != 2:
                sys.exit("unexpected canonical decomposition for %04X" % cp)
            canon.append((cp, parts[0], parts[1]))
            if ucd.normalize("NFC", "".join(map(chr, parts))) != ch:
                excluded.append(cp)
        d = ucd.decomposition(ch)
        if d.startswith("<"):
            compat.append((cp, [int(x, 16) for x in d.split()[1:]]))

    path = os.path.join(ROOT, "include", "pernorm", "detail", "unicode_tables.inc")
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8") as out:
        out.write("// Generated by tools/gen_unicode_data.py from UCD %s. Do not edit.\n\n"
                  % ucd.unidata_version)
        out.write("inline constexpr CombiningClassEntry kCombiningClasses[] = {\n")
        for cp, c in ccc:
            out.write("    {0x%04X, %d},\n" % (cp, c))
        out.write("};\n\n")
        out.write("inline constexpr CanonicalPairEntry kCanonicalDecompositions[] = {\n")
        for cp, a, b in canon:
            out.write("    {0x%04X, 0x%04X, 0x%04X, %s},\n"
                      % (cp, a, b, "true" if cp in excluded else "false"))
        out.write("};\n\n")
        out.write("inline constexpr CompatEntry kCompatDecompositions[] = {\n")
        for cp, parts in compat:
            lit = "".join("\\U%08X" % p for p in parts)
            out.write("    {0x%04X, U\"%s\"},\n" % (cp, lit))
        out.write("};\n")
    return excluded


def write_visual_common():
    path = os.path.join(ROOT, "data", "grammars", "visual_common.rules")
    lines = [
        "# Shared visual normalization, applied for every language after NFC.",
        "# Generated by tools/gen_unicode_data.py from UCD %s." % ucd.unidata_version,
        "#",
        "# waw + (small) damma is written as the single letter u.",
    ]
    for m in WAW_MARKS:
        lines.append("visual_common\tposition_independent\t%s\t%04X" % (hexseq([WAW, m]), U_LETTER))
    lines.append("#")
    lines.append("# Presentation forms fold to their NFKC equivalents. A form ending in waw")
    lines.append("# also absorbs a following damma so the fold cannot expose a waw + damma")
    lines.append("# sequence that a second pass would rewrite.")
    for cp in assigned(PRESENTATION_RANGES):
        ch = chr(cp)
        if not ucd.decomposition(ch).startswith("<"):
            continue
        target = [ord(c) for c in ucd.normalize("NFKC", ch)]
        lines.append("visual_common\tposition_independent\t%04X\t%s" % (cp, hexseq(target)))
        if target[-1] == WAW:
            for m in WAW_MARKS:
                lines.append("visual_common\tposition_independent\t%s\t%s"
                             % (hexseq([cp, m]), hexseq(target[:-1] + [U_LETTER])))
    with open(path, "w", encoding="utf-8") as out:
        out.write("\n".join(lines) + "\n")


def unicode_data_line(cp):
    ch = chr(cp)
    num = ""
    try:
        num = str(ucd.numeric(ch)).rstrip("0").rstrip(".")
    except ValueError:
        pass
    dec = str(ucd.decimal(ch, "")) if ucd.decimal(ch, None) is not None else ""
    dig = str(ucd.digit(ch, "")) if ucd.digit(ch, None) is not None else ""
    fields = [
        "%04X" % cp, ucd.name(ch, ""), ucd.category(ch), str(ucd.combining(ch)),
        ucd.bidirectional(ch), ucd.decomposition(ch), dec, dig, num,
        "Y" if ucd.mirrored(ch) else "N", "", "", "", "", "",
    ]
    return ";".join(fields)


def write_test_data(excluded):
    tdir = os.path.join(ROOT, "tests", "data")
    os.makedirs(tdir, exist_ok=True)
    with open(os.path.join(tdir, "UnicodeData-arabic.txt"), "w", encoding="utf-8") as out:
        for cp in assigned(ARABIC_RANGES):
            out.write(unicode_data_line(cp) + "\n")
    with open(os.path.join(tdir, "CompositionExclusions-arabic.txt"), "w",
              encoding="utf-8") as out:
        out.write("# Canonical composites in the Arabic blocks excluded from composition.\n")
        out.write("# UCD %s.\n" % ucd.unidata_version)
        for cp in excluded:
            out.write("%04X\n" % cp)

    rng = random.Random(20221208)
    pool = list(assigned(ARABIC_RANGES))
    marks = [cp for cp in pool if ucd.combining(chr(cp))]
    with open(os.path.join(tdir, "nfc_reference.tsv"), "w", encoding="utf-8") as out:
        out.write("# input\tnfc   (unicodedata2 %s)\n" % ucd.unidata_version)
        for i in range(4000):
            n = rng.randint(1, 6)
            s = []
            for _ in range(n):
                r = rng.random()
                if r < 0.45:
                    s.append(rng.choice(marks))
                elif r < 0.55:
                    s.append(0x0020)
                else:
                    s.append(rng.choice(pool))
            nfc = [ord(c) for c in ucd.normalize("NFC", "".join(map(chr, s)))]
            out.write("%s\t%s\n" % (hexseq(s), hexseq(nfc)))


def main():
    excluded = write_tables()
    write_visual_common()
    write_test_data(excluded)


if __name__ == "__main__":
    main()

"""Regenerates src/unicode_tables.cpp from Python's unicodedata."""
import sys
import unicodedata


def ranges(pred):
    out, start = [], None
    for cp in range(0x110000):
        ok = pred(cp)
        if ok and start is None:
            start = cp
        if not ok and start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, 0x10FFFF))
    return out


def rows(pairs):
    return ",\n".join("    {0x%04X, 0x%04X}" % p for p in pairs)


punct = ranges(lambda c: unicodedata.category(chr(c)).startswith("P"))
space = ranges(lambda c: chr(c).isspace())
lower = [(c, ord(chr(c).lower())) for c in range(0x110000)
         if chr(c).lower() != chr(c) and len(chr(c).lower()) == 1]

header = ("// Generated by scripts/gen_unicode_tables.py (Unicode %s). Do not edit by hand.\n"
          % unicodedata.unidata_version)
body = """
#include "unicode_tables.hpp"

namespace slideeval::unicode {

const CodepointRange kPunctuation[] = {
%s
};
const std::size_t kPunctuationCount = sizeof(kPunctuation) / sizeof(kPunctuation[0]);

const CodepointRange kWhitespace[] = {
%s
};
const std::size_t kWhitespaceCount = sizeof(kWhitespace) / sizeof(kWhitespace[0]);

const CaseMapping kLowercase[] = {
%s
};
const std::size_t kLowercaseCount = sizeof(kLowercase) / sizeof(kLowercase[0]);

}  // namespace slideeval::unicode
""" % (rows(punct), rows(space), rows(lower))

out = sys.argv[1] if len(sys.argv) > 1 else "src/unicode_tables.cpp"
with open(out, "w") as f:
    f.write(header + body)
print(len(punct), len(space), len(lower))

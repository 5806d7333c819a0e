"""Deterministic sentence segmentation with exact source spans.

Documents are first split into paragraphs on blank lines, then into
sentences at terminal punctuation. A fixed abbreviation list suppresses
false breaks after titles and latinisms; a period followed by a non-space
character (decimals, version numbers) never breaks.
"""

from __future__ import annotations

import re

ABBREVIATIONS = frozenset(
    {
        "dr", "mr", "mrs", "ms", "prof", "rev", "gen", "sen", "rep",
        "sr", "jr", "st", "mt", "ft",
        "vs", "etc", "cf", "eg", "ie", "e.g", "i.e", "et", "al", "fig",
        "inc", "ltd", "co", "corp", "dept", "univ", "approx", "est",
    }
)

_PARAGRAPH_BREAK = re.compile(r"\n[ \t]*\n+")
_TERMINAL = re.compile(r"[.!?]+[\"'”’)\]]*")
_WORD_BEFORE = re.compile(r"([A-Za-z][A-Za-z.]*)$")


def paragraph_spans(text: str) -> list[tuple[int, int]]:
    spans = []
    start = 0
    for match in _PARAGRAPH_BREAK.finditer(text):
        spans.append((start, match.start()))
        start = match.end()
    spans.append((start, len(text)))
    return [(s, e) for s, e in spans if text[s:e].strip()]


def sentence_spans(text: str) -> list[tuple[int, int]]:
    """[start, end) spans of sentences, trimmed of surrounding whitespace.

    Spans never overlap and jointly cover every non-whitespace character of
    the document exactly once.
    """
    spans: list[tuple[int, int]] = []
    for pstart, pend in paragraph_spans(text):
        spans.extend(_split_paragraph(text, pstart, pend))
    return spans


def _split_paragraph(text: str, start: int, end: int) -> list[tuple[int, int]]:
    raw: list[tuple[int, int]] = []
    sent_start = start
    for match in _TERMINAL.finditer(text, start, end):
        boundary = match.end()
        if boundary < end and not text[boundary].isspace():
            continue
        if not _starts_new_sentence(text, boundary, end):
            continue
        if _is_abbreviation_break(text, match):
            continue
        raw.append((sent_start, boundary))
        sent_start = boundary
    if sent_start < end:
        raw.append((sent_start, end))
    trimmed = []
    for s, e in raw:
        chunk = text[s:e]
        if not chunk.strip():
            continue
        left = s + (len(chunk) - len(chunk.lstrip()))
        right = e - (len(chunk) - len(chunk.rstrip()))
        trimmed.append((left, right))
    return trimmed


def _starts_new_sentence(text: str, boundary: int, end: int) -> bool:
    """A break needs the next sentence to open with a capital, digit or quote."""
    position = boundary
    while position < end and text[position].isspace():
        position += 1
    if position >= end:
        return True  # paragraph end always closes the sentence
    head = text[position]
    return head.isupper() or head.isdigit() or head in "\"'“‘(["


def _is_abbreviation_break(text: str, match: re.Match) -> bool:
    # Only a bare period can belong to an abbreviation; "?!" always ends.
    if match.group(0) != ".":
        return False
    before = _WORD_BEFORE.search(text, 0, match.start())
    if before is None:
        return False
    word = before.group(1).lower().rstrip(".")
    if len(word) == 1:  # single-letter initials such as "J. Smith"
        return True
    return word in ABBREVIATIONS

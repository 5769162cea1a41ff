"""Streaming ingestion of wiki revision histories.

Two input formats are auto-detected from the first byte of the stream:

* MediaWiki ``pages-meta-history`` XML exports (uncompressed; pipe the
  file through a decompressor first if needed);
* a line-delimited JSON fixture format, one object per revision with
  fields ``article_id``, ``title``, ``index``, ``comment`` and ``text``,
  rows grouped consecutively by article.

Revision text is normalized with :func:`strip_markup` on the way in, so
downstream diffing sees prose rather than markup. Revisions are numbered
0..n-1 in file order; timestamps are carried as provenance only and never
used for reordering.
"""

from __future__ import annotations

import json
import logging
import re
import xml.etree.ElementTree as ET
from collections import deque
from dataclasses import dataclass, replace
from enum import Enum
from typing import BinaryIO, Iterable, Iterator

log = logging.getLogger(__name__)

# read size; the error-offset window retains a few of these, so memory
# during streaming stays near window_chunks * _CHUNK_SIZE
_CHUNK_SIZE = 1 << 18


class Corpus(str, Enum):
    """Which wiki a sequence came from."""

    COMPLEX = "complex"
    SIMPLE = "simple"


class DumpParseError(Exception):
    """Malformed dump input.

    Carries the byte offset of the offending input where it could be
    determined (``None`` when the position fell outside the retained
    window), plus expat's line/column for XML inputs.
    """

    def __init__(self, message: str, byte_offset: int | None = None,
                 line: int | None = None, column: int | None = None):
        loc = []
        if byte_offset is not None:
            loc.append(f"byte offset {byte_offset}")
        if line is not None:
            loc.append(f"line {line}, column {column}")
        if loc:
            message = f"{message} ({'; '.join(loc)})"
        super().__init__(message)
        self.byte_offset = byte_offset
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Revision:
    """One revision of one article, text already markup-stripped."""

    article_id: str
    revision_index: int
    text: str
    comment: str | None = None
    timestamp: str | None = None
    # position in the unfiltered sequence; set by filter_textual_changes
    original_index: int | None = None


@dataclass(frozen=True)
class VersionSequence:
    """All ingested revisions of one article, in file order."""

    article_id: str
    title: str
    corpus: Corpus
    revisions: tuple[Revision, ...]

    def __post_init__(self) -> None:
        if not self.revisions:
            raise ValueError(f"article {self.article_id!r}: empty version sequence")
        for rev in self.revisions:
            if rev.article_id != self.article_id:
                raise ValueError(
                    f"article {self.article_id!r}: revision carries "
                    f"foreign article id {rev.article_id!r}")


@dataclass
class ParseStats:
    """Counts kept while parsing; pages == emitted + skipped."""

    pages_emitted: int = 0
    pages_skipped: int = 0
    revisions: int = 0

    @property
    def pages_seen(self) -> int:
        return self.pages_emitted + self.pages_skipped


# --- markup stripping --------------------------------------------------

_COMMENT_RE = re.compile(r"<!--.*?(?:-->|\Z)", re.DOTALL)
_TEMPLATE_RE = re.compile(r"\{\{[^{}]*\}\}")
_TABLE_RE = re.compile(r"\{\|(?:(?!\{\|).)*?\|\}", re.DOTALL)
_FILE_LINK_RE = re.compile(r"\[\[\s*(?:file|image|media)\s*:[^\[\]]*\]\]", re.IGNORECASE)
_PIPED_LINK_RE = re.compile(r"\[\[[^\[\]|]*\|([^\[\]]*)\]\]")
_PLAIN_LINK_RE = re.compile(r"\[\[([^\[\]|]*)\]\]")
_HTML_TAG_RE = re.compile(r"</?[a-zA-Z][^<>]*>")
_HEADING_RE = re.compile(r"^[ \t]*=+[ \t]*(.*?)[ \t]*=+[ \t]*$", re.MULTILINE)
_TICKS_RE = re.compile(r"''+")
_SPACE_RE = re.compile(r"[ \t]+")


def _strip_once(text: str) -> str:
    text = _COMMENT_RE.sub(" ", text)
    # innermost-first so nested constructs unwind over iterations
    while True:
        text, n = _TEMPLATE_RE.subn(" ", text)
        if not n:
            break
    while True:
        text, n = _TABLE_RE.subn(" ", text)
        if not n:
            break
    text = _FILE_LINK_RE.sub(" ", text)
    text = _PIPED_LINK_RE.sub(r"\1", text)
    text = _PLAIN_LINK_RE.sub(r"\1", text)
    text = _HTML_TAG_RE.sub(" ", text)
    text = _HEADING_RE.sub(r"\1", text)
    text = _TICKS_RE.sub("", text)
    return text


def strip_markup(text: str) -> str:
    """Reduce wikitext to plain prose.

    Removes templates, tables, HTML tags and comments, file/image links,
    heading markers and quote ticks; link targets collapse to their label
    text. Rules are applied to a fixed point, so the function is
    idempotent. Whitespace runs collapse to single spaces and blank lines
    are dropped.
    """
    prev = None
    for _ in range(25):
        if text == prev:
            break
        prev = text
        text = _strip_once(text)
    lines = [_SPACE_RE.sub(" ", line).strip() for line in text.split("\n")]
    return "\n".join(line for line in lines if line)


# --- XML parsing -------------------------------------------------------


def _local(tag: str) -> str:
    # drop the {namespace} prefix export files carry
    return tag.rsplit("}", 1)[-1]


class _OffsetTracker:
    """Maps expat (line, column) error positions back to byte offsets.

    Keeps the last few fed chunks so the offset stays exact for errors
    inside the retained window; older positions return None.
    """

    def __init__(self, window_chunks: int = 4):
        self.bytes_fed = 0
        self.newlines_fed = 0
        self._window: deque[tuple[int, int, bytes]] = deque(maxlen=window_chunks)

    def note(self, chunk: bytes) -> None:
        self._window.append((self.bytes_fed, self.newlines_fed, chunk))
        self.bytes_fed += len(chunk)
        self.newlines_fed += chunk.count(b"\n")

    def locate(self, line: int, column: int) -> int | None:
        target = line - 1  # newlines preceding the error line
        for start, nl_before, chunk in self._window:
            if nl_before <= target <= nl_before + chunk.count(b"\n"):
                pos = 0
                for _ in range(target - nl_before):
                    nl = chunk.find(b"\n", pos)
                    if nl < 0:
                        return None
                    pos = nl + 1
                return start + pos + column
        return None


def _revision_from_elem(elem: ET.Element, article_id: str, index: int) -> Revision:
    comment = None
    text = ""
    timestamp = None
    for child in elem:
        name = _local(child.tag)
        if name == "comment":
            comment = child.text
        elif name == "text":
            text = child.text or ""
        elif name == "timestamp":
            timestamp = child.text
    return Revision(article_id=article_id, revision_index=index,
                    text=strip_markup(text), comment=comment, timestamp=timestamp)


def _page_to_sequence(page: ET.Element, corpus: Corpus) -> VersionSequence | None:
    title = ""
    page_id = None
    rev_elems = []
    for child in page:
        name = _local(child.tag)
        if name == "title":
            title = child.text or ""
        elif name == "id" and page_id is None:
            page_id = (child.text or "").strip()
        elif name == "revision":
            rev_elems.append(child)
    if not rev_elems:
        return None
    article_id = page_id or title
    revisions = tuple(_revision_from_elem(el, article_id, i)
                      for i, el in enumerate(rev_elems))
    return VersionSequence(article_id=article_id, title=title,
                           corpus=corpus, revisions=revisions)


def _parse_xml(head: bytes, stream: BinaryIO, corpus: Corpus,
               stats: ParseStats) -> Iterator[VersionSequence]:
    parser = ET.XMLPullParser(events=("start", "end"))
    tracker = _OffsetTracker()
    root = None

    def wrap(exc: ET.ParseError) -> DumpParseError:
        line, column = exc.position
        return DumpParseError(f"malformed XML: {exc.msg}",
                              byte_offset=tracker.locate(line, column),
                              line=line, column=column)

    def events():
        # the pull parser defers expat errors to read_events()
        try:
            yield from parser.read_events()
        except ET.ParseError as exc:
            raise wrap(exc) from exc

    chunk = head
    while chunk:
        tracker.note(chunk)
        try:
            parser.feed(chunk)
        except ET.ParseError as exc:
            raise wrap(exc) from exc
        for event, elem in events():
            if event == "start":
                if root is None:
                    root = elem
                continue
            if _local(elem.tag) != "page":
                continue
            seq = _page_to_sequence(elem, corpus)
            if seq is None:
                stats.pages_skipped += 1
                log.warning("skipping page %r: no revisions",
                            next((c.text for c in elem if _local(c.tag) == "title"), "?"))
            else:
                stats.pages_emitted += 1
                stats.revisions += len(seq.revisions)
                yield seq
            if root is not None:
                root.clear()  # keep memory flat
        chunk = stream.read(_CHUNK_SIZE)
    try:
        parser.close()
    except ET.ParseError as exc:
        raise wrap(exc) from exc


# --- JSONL fixture parsing ----------------------------------------------

_REQUIRED_FIXTURE_KEYS = ("article_id", "title", "index", "comment", "text")


def _iter_lines(head: bytes, stream: BinaryIO) -> Iterator[tuple[int, bytes]]:
    offset = 0
    buf = head
    while True:
        nl = buf.find(b"\n")
        if nl < 0:
            more = stream.read(_CHUNK_SIZE)
            if not more:
                break
            buf += more
            continue
        yield offset, buf[:nl]
        offset += nl + 1
        buf = buf[nl + 1:]
    if buf:
        yield offset, buf


def _parse_jsonl(head: bytes, stream: BinaryIO, corpus: Corpus,
                 stats: ParseStats) -> Iterator[VersionSequence]:
    seen_ids: set[str] = set()
    current: list[Revision] = []
    current_id: str | None = None
    current_title = ""

    def flush() -> VersionSequence | None:
        if current_id is None:
            return None
        seq = VersionSequence(article_id=current_id, title=current_title,
                              corpus=corpus, revisions=tuple(current))
        stats.pages_emitted += 1
        stats.revisions += len(seq.revisions)
        return seq

    for lineno, (offset, raw) in enumerate(_iter_lines(head, stream), start=1):
        if not raw.strip():
            continue
        try:
            row = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise DumpParseError(f"malformed JSON on line {lineno}: {exc.msg}",
                                 byte_offset=offset) from exc
        if not isinstance(row, dict):
            raise DumpParseError(f"line {lineno}: expected an object",
                                 byte_offset=offset)
        missing = [k for k in _REQUIRED_FIXTURE_KEYS if k not in row]
        if missing:
            raise DumpParseError(
                f"line {lineno}: missing fields {', '.join(missing)}",
                byte_offset=offset)
        article_id = str(row["article_id"])
        if article_id != current_id:
            seq = flush()
            if seq is not None:
                yield seq
            if article_id in seen_ids:
                raise DumpParseError(
                    f"line {lineno}: article {article_id!r} reappears after "
                    "other articles; rows must be grouped", byte_offset=offset)
            seen_ids.add(article_id)
            current_id = article_id
            current_title = str(row.get("title") or "")
            current = []
        orig = row.get("orig_index")
        current.append(Revision(
            article_id=article_id,
            revision_index=len(current),
            text=strip_markup(str(row.get("text") or "")),
            comment=row.get("comment"),
            timestamp=row.get("timestamp"),
            original_index=int(orig) if orig is not None else None,
        ))
    seq = flush()
    if seq is not None:
        yield seq


# --- public entry points -------------------------------------------------


def parse_dump(stream: BinaryIO, corpus: Corpus,
               stats: ParseStats | None = None) -> Iterator[VersionSequence]:
    """Stream version sequences out of a dump.

    Accepts either MediaWiki export XML or the JSONL fixture format; the
    two are told apart by the first non-whitespace byte. Pages without
    revisions are skipped and counted in ``stats``. Memory stays bounded
    by the largest single page.
    """
    if stats is None:
        stats = ParseStats()
    head = stream.read(_CHUNK_SIZE)
    probe = head.lstrip()[:1]
    if not probe:
        return
    if probe == b"<":
        yield from _parse_xml(head, stream, corpus, stats)
    else:
        yield from _parse_jsonl(head, stream, corpus, stats)


def iter_sequences(path: str, corpus: Corpus,
                   stats: ParseStats | None = None) -> Iterator[VersionSequence]:
    """parse_dump over a file path."""
    with open(path, "rb") as handle:
        yield from parse_dump(handle, corpus, stats)


def filter_textual_changes(seq: VersionSequence) -> VersionSequence:
    """Drop revisions that did not change the stripped text.

    The first revision always survives; each later one survives only if
    its text differs from the previous survivor's. Survivors are
    re-indexed 0..n-1 with their pre-filter position kept in
    ``original_index``. Idempotent.
    """
    survivors: list[Revision] = []
    for rev in seq.revisions:
        if survivors and rev.text == survivors[-1].text:
            continue
        survivors.append(rev)
    renumbered = tuple(
        replace(rev, revision_index=i,
                original_index=(rev.original_index if rev.original_index is not None
                                else rev.revision_index))
        for i, rev in enumerate(survivors))
    return replace(seq, revisions=renumbered)


def write_fixture(sequences: Iterable[VersionSequence], handle) -> int:
    """Write sequences in the JSONL fixture format; returns rows written."""
    rows = 0
    for seq in sequences:
        for rev in seq.revisions:
            row = {
                "article_id": seq.article_id,
                "title": seq.title,
                "index": rev.revision_index,
                "comment": rev.comment,
                "text": rev.text,
            }
            if rev.timestamp is not None:
                row["timestamp"] = rev.timestamp
            if rev.original_index is not None and rev.original_index != rev.revision_index:
                row["orig_index"] = rev.original_index
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")
            rows += 1
    return rows

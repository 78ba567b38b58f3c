"""Structured article extraction from news-page HTML.

Parsing is tag-soup tolerant (stdlib HTMLParser with implied closes for
paragraphs and list items). Body selection uses a paragraph-density
heuristic: the container whose direct <p> children carry the most text
wins, after nav/footer/script/style subtrees are removed. Per-source
override rules (CSS-like element paths keyed by hostname) take
precedence when configured.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from html.parser import HTMLParser
from urllib.parse import urlsplit

from .errors import ExtractionError
from .textproc import tokenize

_VOID = {
    "area", "base", "br", "col", "embed", "hr", "img", "input",
    "link", "meta", "param", "source", "track", "wbr",
}
# Start tags that implicitly close an open <p>.
_P_CLOSERS = {
    "address", "article", "aside", "blockquote", "div", "dl", "fieldset",
    "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr",
    "main", "nav", "ol", "p", "pre", "section", "table", "ul",
}
_BOILERPLATE = {"nav", "footer", "script", "style"}


class _Element:
    __slots__ = ("tag", "attrs", "children")

    def __init__(self, tag: str, attrs: dict):
        self.tag = tag
        self.attrs = attrs
        self.children: list = []  # _Element | str

    def iter_elements(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(
                child for child in reversed(node.children)
                if isinstance(child, _Element)
            )

    def text(self) -> str:
        parts: list[str] = []
        stack: list = [self]
        while stack:
            node = stack.pop()
            if isinstance(node, str):
                parts.append(node)
            else:
                stack.extend(reversed(node.children))
        return _squash(" ".join(parts))


def _squash(text: str) -> str:
    return " ".join(text.split())


class _TreeBuilder(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.root = _Element("#root", {})
        self.stack = [self.root]

    def handle_starttag(self, tag, attrs):
        if tag in _P_CLOSERS:
            for depth in range(len(self.stack) - 1, 0, -1):
                if self.stack[depth].tag == "p":
                    del self.stack[depth:]
                    break
        if tag == "li":
            for depth in range(len(self.stack) - 1, 0, -1):
                if self.stack[depth].tag == "li":
                    del self.stack[depth:]
                    break
        attr_map = {}
        for name, value in attrs:
            attr_map.setdefault(name, value if value is not None else "")
        node = _Element(tag, attr_map)
        self.stack[-1].children.append(node)
        if tag not in _VOID:
            self.stack.append(node)

    def handle_endtag(self, tag):
        for depth in range(len(self.stack) - 1, 0, -1):
            if self.stack[depth].tag == tag:
                del self.stack[depth:]
                return
        # Stray end tag: ignore.

    def handle_data(self, data):
        if data:
            self.stack[-1].children.append(data)


def _parse_html(html: str) -> _Element:
    builder = _TreeBuilder()
    try:
        builder.feed(html)
        builder.close()
    except Exception as exc:  # tag soup should never kill a verification
        raise ExtractionError(f"unparseable html: {exc}") from exc
    return builder.root


def _prune_boilerplate(root: _Element) -> None:
    for node in root.iter_elements():
        node.children = [
            child
            for child in node.children
            if not (isinstance(child, _Element) and child.tag in _BOILERPLATE)
        ]


def _meta_content(root: _Element, *keys: str) -> list[str]:
    found = []
    for node in root.iter_elements():
        if node.tag != "meta":
            continue
        ident = node.attrs.get("property") or node.attrs.get("name")
        if ident and ident.lower() in keys:
            content = _squash(node.attrs.get("content", ""))
            if content:
                found.append(content)
    return found


def _first_tag_text(root: _Element, tag: str) -> str | None:
    for node in root.iter_elements():
        if node.tag == tag:
            text = node.text()
            if text:
                return text
    return None


@dataclass(frozen=True)
class Article:
    """Extracted news item."""

    url: str
    title: str
    authors: tuple[str, ...] = ()
    published_at: date | None = None
    body: str = ""
    word_count: int = 0

    def to_dict(self) -> dict:
        return {
            "url": self.url,
            "title": self.title,
            "authors": list(self.authors),
            "published_at": self.published_at.isoformat() if self.published_at else None,
            "word_count": self.word_count,
        }


def parse_date(raw: str | None) -> date | None:
    """ISO-8601 timestamp or date -> UTC calendar date; None if unparseable.

    Timestamps without a timezone are taken as UTC.
    """
    if not raw:
        return None
    s = raw.strip()
    if not s:
        return None
    if s.endswith(("Z", "z")):
        s = s[:-1] + "+00:00"
    try:
        value = datetime.fromisoformat(s)
    except ValueError:
        return None
    if value.tzinfo is not None:
        value = value.astimezone(timezone.utc)
    return value.date()


_SEGMENT_RE = re.compile(r"^(?P<tag>[a-zA-Z0-9*]+)?(?P<rest>(?:[.#][\w-]+)*)$")


def _parse_selector(selector: str) -> list[tuple[str | None, set[str], str | None]]:
    segments = []
    for raw in selector.split():
        match = _SEGMENT_RE.match(raw)
        if not match:
            raise ValueError(f"bad selector segment {raw!r}")
        tag = match.group("tag")
        tag = None if tag in (None, "*") else tag.lower()
        classes, elem_id = set(), None
        for piece in re.findall(r"[.#][\w-]+", match.group("rest")):
            if piece[0] == ".":
                classes.add(piece[1:])
            else:
                elem_id = piece[1:]
        segments.append((tag, classes, elem_id))
    if not segments:
        raise ValueError("empty selector")
    return segments


def _segment_matches(node: _Element, segment) -> bool:
    tag, classes, elem_id = segment
    if tag is not None and node.tag != tag:
        return False
    if elem_id is not None and node.attrs.get("id") != elem_id:
        return False
    if classes and not classes <= set(node.attrs.get("class", "").split()):
        return False
    return True


def select(root: _Element, selector: str) -> list[_Element]:
    """Elements matching a descendant-path selector like 'div.story p'."""
    segments = _parse_selector(selector)
    matches = []
    # Track ancestor chains with an explicit stack: (node, chain).
    stack = [(root, ())]
    while stack:
        node, chain = stack.pop()
        chain = chain + (node,)
        if _segment_matches(node, segments[-1]):
            # Remaining segments must match along the ancestor chain, in order.
            need = len(segments) - 2
            for ancestor in reversed(chain[:-1]):
                if need < 0:
                    break
                if _segment_matches(ancestor, segments[need]):
                    need -= 1
            if need < 0:
                matches.append(node)
        stack.extend(
            (child, chain)
            for child in reversed(node.children)
            if isinstance(child, _Element)
        )
    matches.reverse()  # document order
    return matches


@dataclass(frozen=True)
class SourceOverrides:
    """Per-hostname element-path rules for title/body/date."""

    rules: dict = field(default_factory=dict)

    @classmethod
    def load(cls, path) -> "SourceOverrides":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def for_url(self, url: str) -> dict:
        host = urlsplit(url).hostname or ""
        return self.rules.get(host, {})


def _dense_body(root: _Element) -> str:
    best = None
    best_score = 0
    for node in root.iter_elements():
        score = sum(
            len(child.text())
            for child in node.children
            if isinstance(child, _Element) and child.tag == "p"
        )
        if score > best_score:
            best, best_score = node, score
    if best is None:
        return ""
    paragraphs = [
        node.text() for node in best.iter_elements() if node.tag == "p"
    ]
    return "\n\n".join(p for p in paragraphs if p)


def extract_article(
    html: str, url: str, overrides: SourceOverrides | None = None
) -> Article:
    """Parse a page into an Article: title, authors, date and body text.

    Raises ExtractionError("no title") or ("no content") when the page
    yields no usable candidates.
    """
    root = _parse_html(html)
    rules = overrides.for_url(url) if overrides else {}

    title = None
    if "title" in rules:
        found = select(root, rules["title"])
        title = found[0].text() if found else None
    if not title:
        for candidate in _meta_content(root, "og:title"):
            title = candidate
            break
    if not title:
        title = _first_tag_text(root, "title") or _first_tag_text(root, "h1")
    if not title:
        raise ExtractionError("no title")

    published = None
    if "date" in rules:
        found = select(root, rules["date"])
        if found:
            node = found[0]
            published = parse_date(node.attrs.get("datetime") or node.text())
    if published is None:
        for candidate in _meta_content(root, "article:published_time"):
            published = parse_date(candidate)
            if published:
                break
    if published is None:
        for node in root.iter_elements():
            if node.tag == "time" and node.attrs.get("datetime"):
                published = parse_date(node.attrs["datetime"])
                break

    authors: list[str] = []
    for name in _meta_content(root, "author", "article:author"):
        if name not in authors:
            authors.append(name)

    _prune_boilerplate(root)
    if "body" in rules:
        body = "\n\n".join(
            node.text() for node in select(root, rules["body"]) if node.text()
        )
    else:
        body = _dense_body(root)
    if not body:
        raise ExtractionError("no content")

    return Article(
        url=url,
        title=title,
        authors=tuple(authors),
        published_at=published,
        body=body,
        word_count=len(tokenize(body)),
    )

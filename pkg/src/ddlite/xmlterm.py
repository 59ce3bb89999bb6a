"""Minimal XML reader producing XmlTerm trees.

Deliberately a small hand-written scanner rather than a full XML stack:
the supported subset is elements, attributes, character data, comments,
and the five predefined entity references.  Prefixed names like
ruleml:imp stay opaque strings; there is no namespace resolution and no
DTD handling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import XmlParseError

_ENTITIES = {"lt": "<", "gt": ">", "amp": "&", "quot": '"', "apos": "'"}


@dataclass
class Text:
    value: str


@dataclass
class XmlTerm:
    """An element: tag, ordered attributes, ordered children."""

    tag: str
    attributes: dict[str, str] = field(default_factory=dict)
    children: list = field(default_factory=list)

    def child_elements(self) -> list["XmlTerm"]:
        return [c for c in self.children if isinstance(c, XmlTerm)]

    def text(self) -> str:
        """Concatenated character data of the direct children."""
        return "".join(c.value for c in self.children if isinstance(c, Text))


def parse_xml(source: str, filename: str = "<xml>") -> XmlTerm:
    """Parse one document; returns the single root element."""
    return _XmlScanner(source, filename).document()


def xml_to_text(node: XmlTerm) -> str:
    """Serialize back to markup; parse_xml(xml_to_text(x)) == x."""
    parts = [f"<{node.tag}"]
    for k, v in node.attributes.items():
        parts.append(f' {k}="{_escape(v, attr=True)}"')
    if not node.children:
        parts.append("/>")
        return "".join(parts)
    parts.append(">")
    for c in node.children:
        if isinstance(c, Text):
            parts.append(_escape(c.value))
        else:
            parts.append(xml_to_text(c))
    parts.append(f"</{node.tag}>")
    return "".join(parts)


def _escape(s: str, attr: bool = False) -> str:
    s = s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    if attr:
        s = s.replace('"', "&quot;")
    return s


_NAME_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_NAME_CHARS = _NAME_START | set("0123456789.-:")


class _XmlScanner:
    def __init__(self, source: str, filename: str):
        self.src = source
        self.pos = 0
        self.filename = filename

    # -- helpers ----------------------------------------------------------

    def _span(self):
        from .kernel import SourceSpan

        line = self.src.count("\n", 0, self.pos) + 1
        col = self.pos - (self.src.rfind("\n", 0, self.pos) + 1) + 1
        return SourceSpan(self.filename, line, col)

    def fail(self, msg: str):
        raise XmlParseError(msg, self._span())

    def peek(self, k: int = 1) -> str:
        return self.src[self.pos : self.pos + k]

    def eof(self) -> bool:
        return self.pos >= len(self.src)

    def skip_misc(self):
        """Skip whitespace, comments, and processing instructions."""
        while not self.eof():
            c = self.src[self.pos]
            if c.isspace():
                self.pos += 1
            elif self.peek(4) == "<!--":
                end = self.src.find("-->", self.pos + 4)
                if end < 0:
                    self.fail("unterminated comment")
                self.pos = end + 3
            elif self.peek(2) == "<?":
                end = self.src.find("?>", self.pos + 2)
                if end < 0:
                    self.fail("unterminated processing instruction")
                self.pos = end + 2
            elif self.peek(2) == "<!":
                self.fail("DTD declarations are not supported")
            else:
                return

    def name(self) -> str:
        start = self.pos
        if self.eof() or self.src[self.pos] not in _NAME_START:
            self.fail("expected a name")
        while not self.eof() and self.src[self.pos] in _NAME_CHARS:
            self.pos += 1
        return self.src[start : self.pos]

    def expect(self, text: str):
        if self.peek(len(text)) != text:
            self.fail(f"expected {text!r}")
        self.pos += len(text)

    def entity(self) -> str:
        self.expect("&")
        end = self.src.find(";", self.pos)
        if end < 0 or end - self.pos > 6:
            self.fail("malformed entity reference")
        ref = self.src[self.pos : end]
        if ref not in _ENTITIES:
            self.fail(f"unsupported entity &{ref};")
        self.pos = end + 1
        return _ENTITIES[ref]

    # -- grammar ----------------------------------------------------------

    def document(self) -> XmlTerm:
        self.skip_misc()
        if self.peek() != "<":
            self.fail("expected a root element")
        root = self.element()
        self.skip_misc()
        if not self.eof():
            self.fail("content after the root element")
        return root

    def element(self) -> XmlTerm:
        self.expect("<")
        tag = self.name()
        attributes: dict[str, str] = {}
        while True:
            while not self.eof() and self.src[self.pos].isspace():
                self.pos += 1
            if self.peek(2) == "/>":
                self.pos += 2
                return XmlTerm(tag, attributes, [])
            if self.peek() == ">":
                self.pos += 1
                break
            key = self.name()
            while not self.eof() and self.src[self.pos].isspace():
                self.pos += 1
            self.expect("=")
            while not self.eof() and self.src[self.pos].isspace():
                self.pos += 1
            if key in attributes:
                self.fail(f"duplicate attribute {key!r}")
            attributes[key] = self.attr_value()
        children = self.content(tag)
        return XmlTerm(tag, attributes, children)

    def attr_value(self) -> str:
        quote = self.peek()
        if quote not in ("'", '"'):
            self.fail("expected a quoted attribute value")
        self.pos += 1
        out = []
        while True:
            if self.eof():
                self.fail("unterminated attribute value")
            c = self.src[self.pos]
            if c == quote:
                self.pos += 1
                return "".join(out)
            if c == "&":
                out.append(self.entity())
            elif c == "<":
                self.fail("'<' inside attribute value")
            else:
                out.append(c)
                self.pos += 1

    def content(self, tag: str) -> list:
        children: list = []
        buf: list[str] = []

        def flush():
            if buf:
                children.append(Text("".join(buf)))
                buf.clear()

        while True:
            if self.eof():
                self.fail(f"unterminated element <{tag}>")
            c = self.src[self.pos]
            if c == "<":
                if self.peek(2) == "</":
                    flush()
                    self.pos += 2
                    closing = self.name()
                    if closing != tag:
                        self.fail(f"mismatched closing tag </{closing}> for <{tag}>")
                    while not self.eof() and self.src[self.pos].isspace():
                        self.pos += 1
                    self.expect(">")
                    return children
                if self.peek(4) == "<!--":
                    end = self.src.find("-->", self.pos + 4)
                    if end < 0:
                        self.fail("unterminated comment")
                    self.pos = end + 3
                    continue
                if self.peek(2) == "<?":
                    end = self.src.find("?>", self.pos + 2)
                    if end < 0:
                        self.fail("unterminated processing instruction")
                    self.pos = end + 2
                    continue
                if self.peek(2) == "<!":
                    self.fail("DTD declarations are not supported")
                flush()
                children.append(self.element())
            elif c == "&":
                buf.append(self.entity())
            else:
                buf.append(c)
                self.pos += 1

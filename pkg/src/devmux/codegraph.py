"""Parse a small C/Java-like language into AST-derived code graphs.

The built-in "mini" grammar covers class declarations with single
inheritance, method and field declarations, blocks, call expressions,
assignments, returns, identifiers, and string/number literals. Each parsed
unit becomes a labeled graph: containment (child) edges, ordering
(next-sibling) edges, call (invokes) edges resolved within the unit, and
inheritance edges. Callees and superclasses that do not resolve locally
get placeholder nodes labeled "external-call" / "external-class".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.col = col


class EdgeKind(str, Enum):
    CHILD = "child"
    NEXT_SIBLING = "next_sibling"
    INVOKES = "invokes"
    INHERITS = "inherits"


@dataclass(frozen=True)
class Node:
    id: int
    label: str
    name: str | None = None


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    kind: EdgeKind


@dataclass(frozen=True)
class CodeGraph:
    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]

    def __len__(self) -> int:
        return len(self.nodes)


KEYWORDS = {"class", "extends", "return"}
_PUNCT = set("{}();,=.")


@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | string | punct | keyword
    text: str
    line: int
    col: int


def tokenize(source: str, strict: bool = True) -> list[Token]:
    """Lex mini-language source. With strict=False, unknown bytes are skipped
    (used for plain-text token fallback)."""
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                if strict:
                    raise ParseError("unterminated block comment", line, col)
                break
            skipped = source[i : end + 2]
            line += skipped.count("\n")
            col = len(skipped) - skipped.rfind("\n") if "\n" in skipped else col + len(skipped)
            i = end + 2
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            text = source[start:i]
            kind = "keyword" if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, line, col))
            col += i - start
            continue
        if ch.isdigit():
            start = i
            while i < n and source[i].isdigit():
                i += 1
            if i < n - 1 and source[i] == "." and source[i + 1].isdigit():
                i += 1
                while i < n and source[i].isdigit():
                    i += 1
            tokens.append(Token("number", source[start:i], line, col))
            col += i - start
            continue
        if ch == '"':
            start = i
            i += 1
            while i < n and source[i] != '"':
                if source[i] == "\\" and i + 1 < n:
                    i += 1
                if source[i] == "\n":
                    if strict:
                        raise ParseError("unterminated string literal", line, col)
                    break
                i += 1
            if i >= n or source[i] != '"':
                if strict:
                    raise ParseError("unterminated string literal", line, col)
                tokens.append(Token("string", source[start + 1 :], line, col))
                break
            tokens.append(Token("string", source[start + 1 : i], line, col))
            i += 1
            col += i - start
            continue
        if ch in _PUNCT:
            tokens.append(Token("punct", ch, line, col))
            i, col = i + 1, col + 1
            continue
        if strict:
            raise ParseError(f"unexpected character {ch!r}", line, col)
        i, col = i + 1, col + 1
    return tokens


class _GraphBuilder:
    def __init__(self):
        self.nodes: list[Node] = []
        self.edges: list[Edge] = []

    def node(self, label: str, name: str | None = None) -> int:
        nid = len(self.nodes)
        self.nodes.append(Node(nid, label, name))
        return nid

    def edge(self, src: int, dst: int, kind: EdgeKind) -> None:
        self.edges.append(Edge(src, dst, kind))

    def attach_children(self, parent: int, children: list[int]) -> None:
        for child in children:
            self.edge(parent, child, EdgeKind.CHILD)
        for a, b in zip(children, children[1:]):
            self.edge(a, b, EdgeKind.NEXT_SIBLING)

    def finish(self) -> CodeGraph:
        return CodeGraph(tuple(self.nodes), tuple(self.edges))


class _MiniParser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.g = _GraphBuilder()
        # (class_name, class_node, superclass_name or None)
        self.classes: list[tuple[str, int, str | None]] = []
        # (method_name, method_node)
        self.methods: list[tuple[str, int]] = []
        # (callee_name, enclosing_method_node, dotted)
        self.calls: list[tuple[str, int | None, bool]] = []
        self.current_method: int | None = None

    def peek(self, offset: int = 0) -> Token | None:
        idx = self.pos + offset
        return self.tokens[idx] if idx < len(self.tokens) else None

    def advance(self) -> Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else Token("punct", "", 1, 1)
            raise ParseError("unexpected end of input", last.line, last.col + len(last.text))
        self.pos += 1
        return tok

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.advance()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            raise ParseError(f"expected {want!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def at(self, kind: str, text: str | None = None, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok is not None and tok.kind == kind and (text is None or tok.text == text)

    def parse_unit(self) -> CodeGraph:
        while self.peek() is not None:
            if self.at("keyword", "class"):
                self.parse_class()
            else:
                self.parse_method_or_field(in_class=False)
        self.resolve()
        return self.g.finish()

    def parse_class(self) -> None:
        self.expect("keyword", "class")
        name = self.expect("ident").text
        superclass = None
        if self.at("keyword", "extends"):
            self.advance()
            superclass = self.expect("ident").text
        node = self.g.node("class-decl", name)
        self.classes.append((name, node, superclass))
        self.expect("punct", "{")
        members: list[int] = []
        while not self.at("punct", "}"):
            members.append(self.parse_method_or_field(in_class=True))
        self.expect("punct", "}")
        self.g.attach_children(node, members)

    def parse_method_or_field(self, in_class: bool) -> int:
        self.expect("ident")  # declared type; not represented structurally
        name_tok = self.expect("ident")
        if self.at("punct", "("):
            return self.parse_method_rest(name_tok.text)
        node = self.g.node("field-decl", name_tok.text)
        children: list[int] = []
        if self.at("punct", "="):
            self.advance()
            children.append(self.parse_expr())
        self.expect("punct", ";")
        self.g.attach_children(node, children)
        return node

    def parse_method_rest(self, name: str) -> int:
        node = self.g.node("method-decl", name)
        self.methods.append((name, node))
        self.expect("punct", "(")
        children: list[int] = []
        while not self.at("punct", ")"):
            self.expect("ident")  # parameter type
            pname = self.expect("ident").text
            children.append(self.g.node("param", pname))
            if self.at("punct", ","):
                self.advance()
        self.expect("punct", ")")
        outer = self.current_method
        self.current_method = node
        children.append(self.parse_block())
        self.current_method = outer
        self.g.attach_children(node, children)
        return node

    def parse_block(self) -> int:
        self.expect("punct", "{")
        node = self.g.node("block")
        children: list[int] = []
        while not self.at("punct", "}"):
            children.append(self.parse_stmt())
        self.expect("punct", "}")
        self.g.attach_children(node, children)
        return node

    def parse_stmt(self) -> int:
        if self.at("punct", "{"):
            return self.parse_block()
        if self.at("keyword", "return"):
            self.advance()
            node = self.g.node("return")
            children: list[int] = []
            if not self.at("punct", ";"):
                children.append(self.parse_expr())
            self.expect("punct", ";")
            self.g.attach_children(node, children)
            return node
        # Two adjacent identifiers open a local declaration: "Foo bar = ...;"
        if self.at("ident") and self.at("ident", offset=1):
            self.advance()
            name = self.advance().text
            node = self.g.node("var-decl", name)
            children = []
            if self.at("punct", "="):
                self.advance()
                children.append(self.parse_expr())
            self.expect("punct", ";")
            self.g.attach_children(node, children)
            return node
        node = self.parse_expr()
        self.expect("punct", ";")
        return node

    def parse_expr(self) -> int:
        left = self.parse_primary()
        if self.at("punct", "="):
            self.advance()
            right = self.parse_expr()
            node = self.g.node("assign")
            self.g.attach_children(node, [left, right])
            return node
        return left

    def parse_primary(self) -> int:
        tok = self.advance()
        if tok.kind == "string":
            return self.g.node("string-literal", tok.text)
        if tok.kind == "number":
            return self.g.node("number-literal", tok.text)
        if tok.kind != "ident":
            raise ParseError(f"expected expression, found {tok.text!r}", tok.line, tok.col)
        name = tok.text
        dotted = False
        while self.at("punct", "."):
            self.advance()
            name += "." + self.expect("ident").text
            dotted = True
        if self.at("punct", "("):
            self.advance()
            node = self.g.node("call-expr", name)
            args: list[int] = []
            while not self.at("punct", ")"):
                args.append(self.parse_expr())
                if self.at("punct", ","):
                    self.advance()
            self.expect("punct", ")")
            self.g.attach_children(node, args)
            self.calls.append((name, self.current_method, dotted))
            return node
        return self.g.node("identifier", name)

    def resolve(self) -> None:
        """Second pass: invokes and inherits edges, with external placeholders.

        Call names resolve against method declarations in the same unit
        (first declaration wins); dotted callees are always external. One
        placeholder node is shared per distinct external name, and repeated
        caller/callee pairs collapse to a single edge.
        """
        method_by_name: dict[str, int] = {}
        for name, node in self.methods:
            method_by_name.setdefault(name, node)
        class_by_name = {name: node for name, node, _ in self.classes}

        external: dict[tuple[str, str], int] = {}

        def external_node(label: str, name: str) -> int:
            key = (label, name)
            if key not in external:
                external[key] = self.g.node(label, name)
            return external[key]

        seen_invokes: set[tuple[int, int]] = set()
        for callee, caller, dotted in self.calls:
            if caller is None:
                continue
            if not dotted and callee in method_by_name:
                target = method_by_name[callee]
            else:
                target = external_node("external-call", callee)
            if (caller, target) not in seen_invokes:
                seen_invokes.add((caller, target))
                self.g.edge(caller, target, EdgeKind.INVOKES)

        for _, node, superclass in self.classes:
            if superclass is None:
                continue
            target = class_by_name.get(superclass)
            if target is None:
                target = external_node("external-class", superclass)
            self.g.edge(node, target, EdgeKind.INHERITS)


def parse_mini(source: str) -> CodeGraph:
    tokens = tokenize(source, strict=True)
    if not tokens:
        return CodeGraph((), ())
    return _MiniParser(tokens).parse_unit()


def fallback_token_graph(text: str) -> CodeGraph:
    """Degenerate graph for non-parseable text: one node per token, no edges.

    Lets free-text queries land in the identifier/literal bands of the
    embedding so retrieval still works on name overlap.
    """
    g = _GraphBuilder()
    for tok in tokenize(text, strict=False):
        if tok.kind in ("ident", "keyword"):
            g.node("identifier", tok.text)
        elif tok.kind == "string":
            g.node("string-literal", tok.text)
        elif tok.kind == "number":
            g.node("number-literal", tok.text)
    return g.finish()


_PARSERS: dict[str, Callable[[str], CodeGraph]] = {"mini": parse_mini}


def register_parser(parser_id: str, fn: Callable[[str], CodeGraph]) -> None:
    _PARSERS[parser_id] = fn


def parse_to_graph(source: str, parser_id: str = "mini") -> CodeGraph:
    """Parse source with a registered parser; raises ParseError with the
    offending line/column, or ValueError for an unknown parser id."""
    try:
        parser = _PARSERS[parser_id]
    except KeyError:
        raise ValueError(f"unknown parser id {parser_id!r}") from None
    return parser(source)

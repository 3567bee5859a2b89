"""Tokenizer for the supported Cypher subset.

Keywords are recognized case-insensitively; identifiers keep their case.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import CypherSyntaxError

KEYWORDS = {
    "MATCH",
    "OPTIONAL",
    "WHERE",
    "WITH",
    "RETURN",
    "DISTINCT",
    "ORDER",
    "BY",
    "ASC",
    "ASCENDING",
    "DESC",
    "DESCENDING",
    "LIMIT",
    "AS",
    "AND",
    "OR",
    "NOT",
    "CONTAINS",
    "IS",
    "NULL",
    "TRUE",
    "FALSE",
    "CASE",
    "WHEN",
    "THEN",
    "ELSE",
    "END",
    "COUNT",
    "COLLECT",
    "SUM",
    # recognized so the parser can reject them with a named error
    "CALL",
    "CREATE",
    "MERGE",
    "DELETE",
    "DETACH",
    "SET",
    "REMOVE",
    "UNWIND",
    "UNION",
    "FOREACH",
    "SKIP",
}

_PUNCT = {
    "(": "LPAREN",
    ")": "RPAREN",
    "{": "LBRACE",
    "}": "RBRACE",
    "[": "LBRACKET",
    "]": "RBRACKET",
    ",": "COMMA",
    ".": "DOT",
    ":": "COLON",
    ";": "SEMI",
    "*": "STAR",
    "/": "SLASH",
    "+": "PLUS",
    "=": "EQ",
}

_ESCAPES = {"\\": "\\", "'": "'", '"': '"', "n": "\n", "t": "\t", "r": "\r"}


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    value: object
    line: int  # 1-based
    column: int  # 1-based
    offset: int


class Lexer:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0
        self.line = 1
        self.column = 1

    def _error(self, message: str, lexeme: str = "") -> CypherSyntaxError:
        return CypherSyntaxError(message, self.line, self.column, lexeme)

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos < len(self.source) and self.source[self.pos] == "\n":
                self.line += 1
                self.column = 1
            else:
                self.column += 1
            self.pos += 1

    def _peek(self, ahead: int = 0) -> str:
        i = self.pos + ahead
        return self.source[i] if i < len(self.source) else ""

    def _token(self, kind: str, lexeme: str, value: object = None) -> Token:
        tok = Token(kind, lexeme, value, self.line, self.column, self.pos)
        self._advance(len(lexeme))
        return tok

    def tokens(self) -> list[Token]:
        out: list[Token] = []
        while self.pos < len(self.source):
            ch = self._peek()
            if ch.isspace():
                self._advance()
                continue
            if ch == "<":
                nxt = self._peek(1)
                if nxt == "-":
                    out.append(self._token("LARROW", "<-"))
                elif nxt == "=":
                    out.append(self._token("LE", "<="))
                elif nxt == ">":
                    out.append(self._token("NEQ", "<>"))
                else:
                    out.append(self._token("LT", "<"))
                continue
            if ch == ">":
                if self._peek(1) == "=":
                    out.append(self._token("GE", ">="))
                else:
                    out.append(self._token("GT", ">"))
                continue
            if ch == "-":
                if self._peek(1) == ">":
                    out.append(self._token("RARROW", "->"))
                else:
                    out.append(self._token("MINUS", "-"))
                continue
            if ch in _PUNCT:
                out.append(self._token(_PUNCT[ch], ch))
                continue
            if ch in "'\"":
                out.append(self._lex_string(ch))
                continue
            if ch.isdigit():
                out.append(self._lex_number())
                continue
            if ch.isalpha() or ch == "_":
                out.append(self._lex_word())
                continue
            raise self._error(f"unexpected character {ch!r}", ch)
        out.append(Token("EOF", "", None, self.line, self.column, self.pos))
        return out

    def _lex_string(self, quote: str) -> Token:
        start_line, start_col, start = self.line, self.column, self.pos
        self._advance()
        chars: list[str] = []
        while True:
            ch = self._peek()
            if ch == "":
                raise CypherSyntaxError("unterminated string literal", start_line, start_col, quote)
            if ch == "\\":
                esc = self._peek(1)
                if esc not in _ESCAPES:
                    raise self._error(f"unsupported escape \\{esc}", "\\" + esc)
                chars.append(_ESCAPES[esc])
                self._advance(2)
                continue
            if ch == quote:
                self._advance()
                break
            chars.append(ch)
            self._advance()
        lexeme = self.source[start : self.pos]
        return Token("STRING", lexeme, "".join(chars), start_line, start_col, start)

    def _lex_number(self) -> Token:
        start_line, start_col, start = self.line, self.column, self.pos
        i = self.pos
        src = self.source
        while i < len(src) and src[i].isdigit():
            i += 1
        is_float = False
        if i < len(src) and src[i] == "." and i + 1 < len(src) and src[i + 1].isdigit():
            is_float = True
            i += 1
            while i < len(src) and src[i].isdigit():
                i += 1
        if i < len(src) and src[i] in "eE":
            j = i + 1
            if j < len(src) and src[j] in "+-":
                j += 1
            if j < len(src) and src[j].isdigit():
                is_float = True
                i = j
                while i < len(src) and src[i].isdigit():
                    i += 1
        lexeme = src[start:i]
        value: object = float(lexeme) if is_float else int(lexeme)
        tok = Token("FLOAT" if is_float else "INT", lexeme, value, start_line, start_col, start)
        self._advance(len(lexeme))
        return tok

    def _lex_word(self) -> Token:
        start_line, start_col, start = self.line, self.column, self.pos
        i = self.pos
        src = self.source
        while i < len(src) and (src[i].isalnum() or src[i] == "_"):
            i += 1
        lexeme = src[start:i]
        upper = lexeme.upper()
        kind = upper if upper in KEYWORDS else "IDENT"
        tok = Token(kind, lexeme, lexeme, start_line, start_col, start)
        self._advance(len(lexeme))
        return tok


def tokenize(source: str) -> list[Token]:
    return Lexer(source).tokens()

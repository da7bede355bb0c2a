"""Tokenizer for the scenario language."""

from dataclasses import dataclass

from ..errors import LexError

BINARY_CHARS = set("+-*/\\<>=~@%&?,")
OPERAND_END = {"identifier", "integer", "string", "symbol", "rparen", "rbracket"}
SINGLE = {"^": "caret", ".": "period", "|": "pipe", "[": "lbracket", "]": "rbracket",
          "(": "lparen", ")": "rparen", "!": "bang"}


@dataclass(frozen=True)
class Token:
    kind: str
    lexeme: str
    line: int
    column: int
    offset: int = 0

    @property
    def pos(self):
        return (self.line, self.column)


def _ident_start(c):
    return c.isalpha() or c == "_"


def _ident_char(c):
    return c.isalnum() or c == "_"


class Lexer:
    def __init__(self, text: str):
        self.text = text
        self.i = 0
        self.line = 1
        self.col = 1
        self.tokens: list[Token] = []

    def peek(self, ahead=0):
        j = self.i + ahead
        return self.text[j] if j < len(self.text) else ""

    def advance(self, n=1):
        for _ in range(n):
            if self.text[self.i] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.i += 1

    def error(self, message, line=None, col=None):
        raise LexError(message, (line or self.line, col or self.col))

    def emit(self, kind, start, line, col):
        self.tokens.append(Token(kind, self.text[start:self.i], line, col, start))

    def run(self) -> list[Token]:
        while self.i < len(self.text):
            c = self.peek()
            if c.isspace():
                self.advance()
                continue
            start, line, col = self.i, self.line, self.col
            if c == '"':
                self._comment()
            elif _ident_start(c):
                self._word(start, line, col)
            elif c.isdigit() or (c == "-" and self.peek(1).isdigit() and self._negative_allowed()):
                self.advance()
                while self.peek().isdigit():
                    self.advance()
                if _ident_start(self.peek()):
                    self.error("malformed number", line, col)
                self.emit("integer", start, line, col)
            elif c == "'":
                self._string(start, line, col, "string")
            elif c == "#":
                self._symbol(start, line, col)
            elif c == ":":
                if self.peek(1) == "=":
                    self.advance(2)
                    self.emit("assign", start, line, col)
                elif _ident_start(self.peek(1)):
                    self.advance()
                    while _ident_char(self.peek()):
                        self.advance()
                    self.emit("blockArg", start, line, col)
                else:
                    self.error("stray ':'")
            elif c in SINGLE:
                self.advance()
                self.emit(SINGLE[c], start, line, col)
            elif c in BINARY_CHARS:
                self.advance()
                while self.peek() in BINARY_CHARS and self.peek():
                    if self.peek() == "-" and self.peek(1).isdigit():
                        break
                    self.advance()
                self.emit("binaryOp", start, line, col)
            else:
                self.error(f"unexpected character {c!r}")
        self.tokens.append(Token("eof", "", self.line, self.col, self.i))
        return self.tokens

    def _negative_allowed(self):
        return not self.tokens or self.tokens[-1].kind not in OPERAND_END

    def _comment(self):
        line, col = self.line, self.col
        self.advance()
        while self.peek() != '"':
            if not self.peek():
                self.error("unterminated comment", line, col)
            self.advance()
        self.advance()

    def _word(self, start, line, col):
        while _ident_char(self.peek()):
            self.advance()
        if self.peek() == ":" and self.peek(1) != "=":
            self.advance()
            self.emit("keyword", start, line, col)
        else:
            self.emit("identifier", start, line, col)

    def _string(self, start, line, col, kind):
        self.advance()
        while True:
            c = self.peek()
            if not c:
                self.error("unterminated string", line, col)
            self.advance()
            if c == "'":
                if self.peek() == "'":
                    self.advance()
                    continue
                break
        self.emit(kind, start, line, col)

    def _symbol(self, start, line, col):
        self.advance()
        c = self.peek()
        if _ident_start(c):
            while True:
                while _ident_char(self.peek()):
                    self.advance()
                if self.peek() == ":" and self.peek(1) != "=":
                    self.advance()
                    if _ident_start(self.peek()):
                        continue
                break
        elif c == "'":
            self._string(start, line, col, "symbol")
            return
        elif c in BINARY_CHARS and c:
            while self.peek() in BINARY_CHARS and self.peek():
                self.advance()
        else:
            self.error("malformed symbol", line, col)
        self.emit("symbol", start, line, col)


def tokenize(text: str) -> list[Token]:
    """Token stream ending with an ``eof`` token; comments are dropped."""
    return Lexer(text).run()


def string_value(lexeme: str) -> str:
    return lexeme[1:-1].replace("''", "'")


def symbol_value(lexeme: str) -> str:
    body = lexeme[1:]
    if body.startswith("'"):
        return string_value(body)
    return body

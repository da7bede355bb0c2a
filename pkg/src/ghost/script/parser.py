"""Recursive-descent parser.

Grammar (unary binds tighter than binary, binary tighter than keyword)::

    program     -> (chunk | statement ['.'])*
    chunk       -> '!' IDENT ['class'] ('methodsFor' | 'methodsFor:' STRING) '!' (method '!')* '!'
    method      -> pattern [temps] statements
    pattern     -> IDENT | BINARY IDENT | (KEYWORD IDENT)+
    statement   -> ['^'] expression
    expression  -> IDENT ':=' expression | keywordExpr
    keywordExpr -> binaryExpr (KEYWORD binaryExpr)*
    binaryExpr  -> unaryExpr (BINARY unaryExpr)*
    unaryExpr   -> primary IDENT*
    primary     -> literal | IDENT | block | '(' expression ')'
    block       -> '[' [BLOCKARG+ '|'] [temps] statements ']'
    temps       -> '|' IDENT* '|'
"""

from ..errors import ParseError
from . import nodes as n
from .lexer import string_value, symbol_value, tokenize

PSEUDO = {"true": "true", "false": "false", "nil": "nil"}
CLASS_DEF_SELECTORS = ("subclass:instanceVariableNames:", "subclass:instanceVariableNames:compact:")


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0

    # -- token helpers ---------------------------------------------------

    @property
    def tok(self):
        return self.tokens[self.i]

    def at(self, kind, lexeme=None):
        t = self.tokens[self.i]
        return t.kind == kind and (lexeme is None or t.lexeme == lexeme)

    def take(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, kind, lexeme=None, what=None):
        if not self.at(kind, lexeme):
            self.fail(what or lexeme or kind)
        return self.take()

    def fail(self, *expected):
        t = self.tok
        found = t.lexeme or "end of input"
        raise ParseError(f"expected {' or '.join(expected)}, found {found!r}", t.pos, expected)

    # -- program ---------------------------------------------------------

    def parse_program(self):
        directives = []
        while not self.at("eof"):
            if self.at("period"):
                self.take()
            elif self.at("bang"):
                directives.extend(self.parse_chunk())
            elif self.at("pipe"):
                start = self.tok
                directives.append(n.Declare(self.parse_temps(), pos=start.pos))
            else:
                directives.append(self.parse_directive())
                if not (self.at("period") or self.at("eof") or self.at("bang")):
                    self.fail("'.'")
        return directives

    def parse_directive(self):
        start = self.tok
        expr = self.parse_expression()
        if isinstance(expr, n.KeywordSend):
            recv = expr.receiver
            if isinstance(recv, n.VariableRef) and recv.name == "self":
                if expr.selector == "assert:equals:":
                    return n.AssertEqual(*expr.args, pos=start.pos)
                if expr.selector == "assert:trapCount:":
                    count = expr.args[1]
                    if not (isinstance(count, n.Literal) and count.kind == "int"):
                        raise ParseError("trap count must be an integer literal", count.pos, ("integer",))
                    return n.AssertTrapCount(expr.args[0], count.value, pos=start.pos)
            if expr.selector in CLASS_DEF_SELECTORS:
                return self.class_def(expr, start)
        return n.ExpressionStatement(expr, pos=start.pos)

    def class_def(self, expr, start):
        recv = expr.receiver
        if isinstance(recv, n.VariableRef):
            super_name = recv.name
        elif isinstance(recv, n.Literal) and recv.kind == "nil":
            super_name = None
        else:
            return n.ExpressionStatement(expr, pos=start.pos)
        name, ivars = expr.args[0], expr.args[1]
        if not (isinstance(name, n.Literal) and name.kind == "symbol"):
            raise ParseError("class name must be a symbol", name.pos, ("symbol",))
        if not (isinstance(ivars, n.Literal) and ivars.kind == "string"):
            raise ParseError("instance variable names must be a string", ivars.pos, ("string",))
        compact = False
        if len(expr.args) == 3:
            flag = expr.args[2]
            if not (isinstance(flag, n.Literal) and flag.kind in ("true", "false")):
                raise ParseError("compact flag must be true or false", flag.pos, ("true", "false"))
            compact = flag.kind == "true"
        return n.ClassDef(name.value, super_name, tuple(ivars.value.split()), compact, pos=start.pos)

    def parse_chunk(self):
        opener = self.expect("bang")
        class_name = self.expect("identifier", what="class name").lexeme
        class_side = False
        if self.at("identifier", "class"):
            self.take()
            class_side = True
        if self.at("keyword", "methodsFor:"):
            self.take()
            self.expect("string", what="category string")
        else:
            self.expect("identifier", "methodsFor")
        self.expect("bang")
        defs = []
        while True:
            if self.at("bang"):
                self.take()
                break
            if self.at("eof"):
                raise ParseError("unterminated method chunk", opener.pos, ("'!'",))
            start = self.tok
            method = self.parse_method_body(until="bang")
            end = self.expect("bang")
            method.source = self.text[start.offset:end.offset].strip()
            defs.append(n.MethodDef(class_name, class_side, method, pos=start.pos))
        return defs

    # -- methods ---------------------------------------------------------

    def parse_method_body(self, until="eof"):
        start = self.tok
        params = []
        if self.at("identifier"):
            selector = self.take().lexeme
        elif self.at("binaryOp"):
            selector = self.take().lexeme
            params.append(self.expect("identifier", what="argument name").lexeme)
        elif self.at("keyword"):
            parts = []
            while self.at("keyword"):
                parts.append(self.take().lexeme)
                params.append(self.expect("identifier", what="argument name").lexeme)
            selector = "".join(parts)
        else:
            self.fail("message pattern")
        temps = self.parse_temps() if self.at("pipe") else ()
        body = self.parse_statements(until)
        return n.MethodNode(selector, tuple(params), temps, body, pos=start.pos)

    def parse_temps(self):
        self.expect("pipe")
        names = []
        while self.at("identifier"):
            names.append(self.take().lexeme)
        self.expect("pipe", what="'|'")
        return tuple(names)

    def parse_statements(self, until):
        statements = []
        while not self.at(until):
            if self.at("caret"):
                start = self.take()
                statements.append(n.Return(self.parse_expression(), pos=start.pos))
            else:
                statements.append(self.parse_expression())
            if self.at("period"):
                self.take()
            elif not self.at(until):
                self.fail("'.'", repr(until))
        return tuple(statements)

    # -- expressions -----------------------------------------------------

    def parse_expression(self):
        if self.at("identifier") and self.tokens[self.i + 1].kind == "assign":
            name = self.take()
            self.take()
            if name.lexeme in ("self", "super", "true", "false", "nil"):
                raise ParseError(f"cannot assign to {name.lexeme}", name.pos, ("variable",))
            return n.Assignment(name.lexeme, self.parse_expression(), pos=name.pos)
        return self.parse_keyword()

    def parse_keyword(self):
        recv = self.parse_binary()
        if not self.at("keyword"):
            return recv
        start = self.tok
        parts, args = [], []
        while self.at("keyword"):
            parts.append(self.take().lexeme)
            args.append(self.parse_binary())
        return n.KeywordSend(recv, "".join(parts), tuple(args), pos=start.pos)

    def parse_binary(self):
        recv = self.parse_unary()
        while self.at("binaryOp"):
            op = self.take()
            recv = n.BinarySend(recv, op.lexeme, self.parse_unary(), pos=op.pos)
        return recv

    def parse_unary(self):
        recv = self.parse_primary()
        while self.at("identifier"):
            t = self.take()
            recv = n.UnarySend(recv, t.lexeme, pos=t.pos)
        return recv

    def parse_primary(self):
        t = self.tok
        if t.kind == "integer":
            self.take()
            return n.Literal("int", int(t.lexeme), pos=t.pos)
        if t.kind == "string":
            self.take()
            return n.Literal("string", string_value(t.lexeme), pos=t.pos)
        if t.kind == "symbol":
            self.take()
            return n.Literal("symbol", symbol_value(t.lexeme), pos=t.pos)
        if t.kind == "identifier":
            self.take()
            if t.lexeme in PSEUDO:
                return n.Literal(PSEUDO[t.lexeme], pos=t.pos)
            if t.lexeme == "super":
                return n.Super(pos=t.pos)
            return n.VariableRef(t.lexeme, pos=t.pos)
        if t.kind == "lparen":
            self.take()
            inner = self.parse_expression()
            self.expect("rparen", what="')'")
            return inner
        if t.kind == "lbracket":
            return self.parse_block()
        self.fail("expression")

    def parse_block(self):
        start = self.expect("lbracket")
        params = []
        while self.at("blockArg"):
            params.append(self.take().lexeme[1:])
        if params:
            if self.at("rbracket"):
                pass
            else:
                self.expect("pipe", what="'|'")
        temps = self.parse_temps() if self.at("pipe") else ()
        body = self.parse_statements("rbracket")
        self.expect("rbracket")
        return n.Block(tuple(params), temps, body, pos=start.pos)


def parse_program(text: str):
    """Directive list for a whole script."""
    return Parser(text).parse_program()


def parse_expression(text: str):
    p = Parser(text)
    expr = p.parse_expression()
    if not p.at("eof"):
        p.fail("end of input")
    return expr


def parse_method(source: str) -> n.MethodNode:
    p = Parser(source)
    method = p.parse_method_body()
    method.source = source.strip()
    return method

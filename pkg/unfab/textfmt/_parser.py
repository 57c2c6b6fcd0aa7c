from __future__ import annotations

import dataclasses
from fractions import Fraction
import re
from typing import NoReturn

from unfab.exceptions import KindMismatchError
from unfab.exceptions import ParseError
from unfab.ir import BinOp
from unfab.ir import BUILTINS
from unfab.ir import Const
from unfab.ir import Effect
from unfab.ir import effect_of
from unfab.ir import Expr
from unfab.ir import FunctionDef
from unfab.ir import Literal
from unfab.ir import make_statement
from unfab.ir import Mode
from unfab.ir import ModeKey
from unfab.ir import Operation
from unfab.ir import Program
from unfab.ir import Ref
from unfab.ir import SourceSpan
from unfab.ir import Statement
from unfab.ir import Var
from unfab.ir import VarKind
from unfab.ir._builtins import resolve_alias
from unfab.textfmt._lexer import Token
from unfab.textfmt._lexer import tokenize


_NEW = re.compile(r"^(un)?new([01])$")
_CAT = re.compile(r"^(un)?cat([0-9]+)$")
_MODES = {"adj": Mode.ADJOINT, "G": Mode.GARBAGE, "O": Mode.CLASSICAL}
_COMPARISONS = ("==", "!=", "<", "<=", ">", ">=")
_Ident = tuple[VarKind, str]


@dataclasses.dataclass
class _RawStatement:
    stmt: Statement
    annotated: Effect | None


@dataclasses.dataclass
class _RawFunction:
    function: FunctionDef
    annotated: Effect | None
    statements: list[_RawStatement]


class _Parser:
    def __init__(self, text: str, file: str) -> None:
        self._tokens = tokenize(text, file)
        self._pos = 0
        self._file = file

    # Token helpers.

    def _peek(self, offset: int = 0) -> Token:
        return self._tokens[min(self._pos + offset, len(self._tokens) - 1)]

    def _advance(self) -> Token:
        token = self._peek()
        self._pos += 1
        return token

    def _at(self, text: str) -> bool:
        return self._peek().is_(text)

    def _accept(self, text: str) -> bool:
        if self._at(text):
            self._pos += 1
            return True
        return False

    def _expect(self, text: str) -> Token:
        if not self._at(text):
            self._fail("expected '{}'".format(text))
        return self._advance()

    def _expect_kind(self, kind: str, what: str) -> Token:
        if self._peek().kind != kind:
            self._fail("expected {}".format(what))
        return self._advance()

    def _fail(self, message: str, token: Token | None = None) -> NoReturn:
        token = token or self._peek()
        found = token.text if token.kind not in ("NEWLINE", "EOF") else token.kind.lower()
        raise ParseError("{}, found '{}'".format(message, found), token.span(self._file))

    def _span(self, start: Token) -> SourceSpan:
        end = self._tokens[max(self._pos - 1, 0)]
        return SourceSpan(self._file, start.line, start.col, end.line, end.col + len(end.text))

    def _skip_separators(self) -> None:
        while self._peek().kind == "NEWLINE" or self._at(";"):
            self._advance()

    # Grammar.

    def parse(self) -> list[_RawFunction]:
        functions = []
        self._skip_separators()
        while self._peek().kind != "EOF":
            functions.append(self._function())
            self._skip_separators()
        return functions

    def _function(self) -> _RawFunction:
        start = self._expect_kind("NAME", "function name")
        modes = self._modes()
        bracket: list[Var] = []
        consumed: list[Var] = []
        if self._accept("["):
            bracket = self._decls("]")
        if self._accept("("):
            consumed = self._decls(")")
        annotated = self._assign()
        self._expect("{")
        statements: list[_RawStatement] = []
        self._skip_separators()
        while not self._at("}"):
            statements.append(self._statement())
            if not self._at("}"):
                if self._peek().kind != "NEWLINE" and not self._at(";"):
                    self._fail("expected end of statement")
                self._skip_separators()
        self._expect("}")
        self._expect(">")
        returns: list[Var] = []
        if self._peek().kind not in ("NEWLINE", "EOF"):
            returns.append(self._var())
            while self._accept(","):
                returns.append(self._var())
        for var in bracket:
            if var.is_garbage:
                self._fail("garbage variable {} cannot be conserved".format(var), start)
        for var in consumed:
            if var.is_classical:
                self._fail("classical variable {} cannot be consumed".format(var), start)
        function = FunctionDef(
            name=start.text,
            classical_in=tuple(v for v in bracket if v.is_classical),
            conserved_params=tuple(v for v in bracket if not v.is_classical),
            consumed_params=tuple(consumed),
            body=tuple(raw.stmt for raw in statements),
            returned_classical=tuple(v for v in returns if v.is_classical),
            returned_quantum=tuple(v for v in returns if not v.is_classical),
            declared_effect=annotated or Effect.PURE,
            modes=modes,
            bin=_find_bin(consumed, returns),
            span=self._span(start),
        )
        return _RawFunction(function, annotated, statements)

    def _modes(self) -> tuple[Mode, ...]:
        modes = []
        while self._accept("^"):
            token = self._expect_kind("NAME", "mode 'adj', 'G' or 'O'")
            if token.text not in _MODES:
                self._fail("unknown mode", token)
            modes.append(_MODES[token.text])
        return tuple(modes)

    def _assign(self) -> Effect | None:
        token = self._expect_kind("ASSIGN", "':='")
        return Effect.from_symbol(token.text[2]) if len(token.text) == 3 else None

    def _var(self) -> Var:
        token = self._advance()
        if token.kind == "CVAR":
            return Var(token.text[1:], VarKind.CLASSICAL)
        if token.kind == "GVAR":
            return Var(token.text[1:], VarKind.GARBAGE)
        if token.kind == "NAME" and token.text not in ("if", "true", "false"):
            return Var(token.text)
        self._fail("expected a variable", token)

    def _decl(self) -> Var:
        token = self._peek()
        var = self._var()
        if self._accept(":"):
            width = self._expr()
            if not var.is_quantum:
                self._fail("kind annotation mismatch: {} cannot have a width".format(var), token)
            var = dataclasses.replace(var, width=width)
        return var

    def _decls(self, close: str) -> list[Var]:
        decls: list[Var] = []
        if not self._accept(close):
            decls.append(self._decl())
            while self._accept(","):
                decls.append(self._decl())
            self._expect(close)
        return decls

    def _vars(self, close: str) -> list[Var]:
        vars_: list[Var] = []
        if not self._accept(close):
            vars_.append(self._var())
            while self._accept(","):
                vars_.append(self._var())
            self._expect(close)
        return vars_

    def _statement(self) -> _RawStatement:
        start = self._peek()
        outs: list[Var] = []
        if self._peek().kind != "ASSIGN":
            outs.append(self._decl())
            while self._accept(","):
                outs.append(self._decl())
        annotated = self._assign()
        head = self._peek()
        conserved: list[Var] = []
        consumed: list[Var] = []
        if head.kind in ("CVAR", "INT") or head.is_("(") or head.is_("-"):
            op, conserved = self._calc()
        elif head.kind == "NAME" and head.text in ("true", "false"):
            op, conserved = self._calc()
        else:
            op = self._operation()
            if self._accept("["):
                conserved = self._vars("]")
            if self._accept("("):
                consumed = self._vars(")")
        condition: list[Literal] = []
        if self._accept("if"):
            condition.append(self._literal())
            while self._accept("&&"):
                condition.append(self._literal())
        tag = None
        if self._accept("@"):
            tag = self._expect_kind("NAME", "pair tag").text
        try:
            stmt = Statement(
                op=op,
                produced_classical=tuple(v for v in outs if v.is_classical),
                produced_quantum=tuple(v for v in outs if not v.is_classical),
                conserved=tuple(conserved),
                consumed=tuple(consumed),
                condition=tuple(condition),
                pair_tag=tag,
                span=self._span(start),
            )
        except ValueError as e:
            raise ParseError(str(e), self._span(start)) from None
        return _RawStatement(stmt, annotated)

    def _literal(self) -> Literal:
        negated = self._accept("!")
        token = self._peek()
        var = self._var()
        if var.is_garbage:
            self._fail("garbage variable cannot be a condition", token)
        return Literal(var, negated)

    def _calc(self) -> tuple[Operation, list[Var]]:
        expr = self._expr()
        refs = [Var(name, VarKind.CLASSICAL) for name in sorted(expr.free_vars())]
        return Operation("calc", static_args=(expr,)), refs

    def _operation(self) -> Operation:
        token = self._expect_kind("NAME", "an operation")
        name = token.text
        modes: list[Mode] = []
        static: list[object] = []
        target = name
        new = _NEW.match(name)
        cat = _CAT.match(name)
        alias = resolve_alias(name)
        if new is not None:
            target = "new"
            static.append(int(new.group(2)))
            if new.group(1):
                modes.append(Mode.ADJOINT)
        elif cat is not None:
            target = "uncat" if cat.group(1) else "cat"
            static.append(int(cat.group(2)))
        elif alias is not None:
            target = alias
            modes.append(Mode.ADJOINT)
        elif name in ("new", "cat", "uncat"):
            self._fail("'{}' needs a static argument".format(name), token)
        modes.extend(self._modes())
        info = BUILTINS.get(target)
        if info is not None and info.static == "angle":
            static.append(self._angle())
        elif info is not None and info.static == "arity":
            self._expect("[")
            widths = [self._expr()]
            while self._accept(","):
                widths.append(self._expr())
            self._expect("]")
            if len(widths) != static[0]:
                self._fail("{} expects {} widths".format(name, static[0]), token)
            static.extend(widths)
        return Operation(target, tuple(modes), tuple(static))

    def _angle(self) -> Fraction:
        self._expect("<")
        sign = -1 if self._accept("-") else 1
        value = Fraction(1)
        token = self._peek()
        if token.kind == "INT":
            self._advance()
            if token.text == "0" and self._at(">"):
                self._advance()
                return Fraction(0)
            value = Fraction(int(token.text))
            self._expect("*")
        if not self._accept("pi"):
            self._fail("expected an angle such as 'pi/4'")
        if self._accept("/"):
            value /= int(self._expect_kind("INT", "a denominator").text)
        self._expect(">")
        return sign * value

    # Classical expressions.

    def _expr(self) -> Expr:
        lhs = self._additive()
        token = self._peek()
        if token.kind == "OP" and token.text in _COMPARISONS:
            self._advance()
            return BinOp(token.text, lhs, self._additive())
        return lhs

    def _additive(self) -> Expr:
        expr = self._term()
        while self._at("+") or self._at("-"):
            op = self._advance().text
            expr = BinOp(op, expr, self._term())
        return expr

    def _term(self) -> Expr:
        expr = self._unary()
        while self._accept("*"):
            expr = BinOp("*", expr, self._unary())
        return expr

    def _unary(self) -> Expr:
        if self._accept("-"):
            operand = self._unary()
            if isinstance(operand, Const) and not isinstance(operand.value, bool):
                return Const(-operand.value)
            return BinOp("-", Const(0), operand)
        return self._atom()

    def _atom(self) -> Expr:
        token = self._advance()
        if token.kind == "INT":
            return Const(int(token.text))
        if token.kind == "CVAR":
            return Ref(token.text[1:])
        if token.kind == "NAME" and token.text in ("true", "false"):
            return Const(token.text == "true")
        if token.is_("("):
            expr = self._expr()
            self._expect(")")
            return expr
        self._fail("expected an expression", token)


def _find_bin(consumed: list[Var], returns: list[Var]) -> Var | None:
    for vars_ in (returns, consumed):
        garbage = [v for v in vars_ if v.is_garbage]
        if garbage:
            return garbage[-1]
    return None


class _Resolver:
    """Second pass: attach declared widths to uses, infer effects and check operand kinds."""

    def __init__(self, raw: list[_RawFunction]) -> None:
        self._raw = raw
        self.program = Program()
        for item in raw:
            f = item.function
            if f.modes:
                key = ModeKey(f.name, f.modes)
                if key in self.program.derived:
                    raise ParseError("Duplicate definition of '{}'.".format(key), f.span)
                self.program.derived[key] = f
            else:
                if f.name in self.program.functions:
                    raise ParseError("Duplicate definition of '{}'.".format(f.name), f.span)
                self.program.functions[f.name] = f
        for key in self.program.derived:
            if key.base not in self.program.functions:
                raise ParseError("Derived function '{}' has no base definition.".format(key))

    def resolve(self) -> Program:
        resolved = [self._widths(item) for item in self._raw]
        for f in resolved:
            self._store(f)
        final = [self._effects(f, item) for f, item in zip(resolved, self._raw)]
        for f in final:
            self._store(f)
        return self.program

    def _store(self, f: FunctionDef) -> None:
        if f.modes:
            self.program.derived[ModeKey(f.name, f.modes)] = f
        else:
            self.program.functions[f.name] = f

    def _widths(self, item: _RawFunction) -> FunctionDef:
        f = item.function
        declared: dict[_Ident, Var] = {}
        for var in f.params:
            declared[var.ident] = var
        for stmt in f.body:
            for var in stmt.produced:
                declared.setdefault(var.ident, var)

        def resolve(var: Var) -> Var:
            if var.width is not None:
                return var
            return declared.get(var.ident, var)

        return f.map_vars(resolve)

    def _effects(self, f: FunctionDef, item: _RawFunction) -> FunctionDef:
        body = []
        for stmt, raw in zip(f.body, item.statements):
            target = stmt.op.target
            if not stmt.op.is_builtin and target not in self.program.functions:
                raise ParseError("Unknown operation '{}'.".format(target), stmt.span)
            try:
                checked = make_statement(
                    stmt.op,
                    stmt.conserved,
                    stmt.consumed,
                    stmt.produced_quantum,
                    stmt.condition,
                    produced_classical=stmt.produced_classical,
                    program=self.program,
                )
            except (KindMismatchError, ValueError) as e:
                raise ParseError(str(e), stmt.span) from None
            effect = raw.annotated if raw.annotated is not None else checked.effect
            body.append(dataclasses.replace(stmt, effect=effect))
        f = f.with_body(body)
        if item.annotated is None:
            f = dataclasses.replace(f, declared_effect=effect_of(f, self.program))
        return f


def parse_program(text: str, file: str = "<string>") -> Program:
    """Parse the text form of a program.

    Args:
        text:
            Program text.
        file:
            File name recorded in source spans.

    Returns:
        The parsed program. Derived functions written with a mode suffix (``f^adj``) are
        placed in the derived-function cache.

    Raises:
        :exc:`~unfab.exceptions.ParseError`:
            On syntax errors, unknown operations and operand kind mismatches.

    """
    raw = _Parser(text, file).parse()
    return _Resolver(raw).resolve()


def parse_function(text: str, file: str = "<string>") -> FunctionDef:
    """Parse text holding exactly one function definition."""
    program = parse_program(text, file)
    functions = list(program.functions.values()) + list(program.derived.values())
    if len(functions) != 1:
        raise ParseError("Expected exactly one function, found {}.".format(len(functions)))
    return functions[0]

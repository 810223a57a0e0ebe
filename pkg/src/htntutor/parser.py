"""Parser and canonical serializer for the domain file format.

The format is line-oriented only in spirit; whitespace is free and `#`
starts a comment. Records:

    domain <name>
    skill <sym> "<display name>"
    root <head>
    method <name> <head> [unordered] { [pre { ... }] subtasks { ... } [skill <sym>] }
    operator <name> <head> { [pre { ... }] action <term> = <expr> [effects { ... }] [skill <sym>] }
    axiom <pattern> { pre { ... } }

Conditions are separated by `;` and are a pattern, `not <pattern>`, or
`test(<term> <op> <term>)` with op one of = != < <= > >=. Effects are
`+<pattern>` / `-<pattern>`. Terms are `?var`, symbols, integers, ratios
`a/b`, quoted text, and `true`/`false`. Expressions use + - * / with the
usual precedence, parentheses, and the calls gcd, lcm, intLog, frac, num,
den, fracText. Expression ratio values are written with frac(); `a/b` in an
expression is ordinary division.

Loading enforces: a single domain record, a root record, unique record
names, no task head achieved by both methods and operators, known skill
references, condition safety, and stratified negation over axiom heads.
"""

from __future__ import annotations

from dataclasses import dataclass

from .domain import (
    CALL_ARITY,
    SEQUENTIAL,
    UNORDERED,
    ActionTemplate,
    Axiom,
    Bin,
    Call,
    Domain,
    Expr,
    Lit,
    Method,
    Operator,
    Ref,
    TaskHead,
    Unary,
)
from .errors import DomainParseError, SafetyError
from .facts import Negated, Pattern, Positive, Test, check_safety
from .values import Bool, Int, Sym, Term, Text, Var, make_ratio

RESERVED = {
    "domain", "skill", "root", "method", "operator", "axiom",
    "unordered", "pre", "subtasks", "action", "effects", "test", "not",
    "true", "false",
}

_PUNCT = ["<=", ">=", "!=", "(", ")", "{", "}", ",", ";", "=", "+", "-", "*", "/", "<", ">"]


@dataclass(frozen=True)
class _Tok:
    typ: str  # sym var int str punct eof
    val: str
    line: int
    col: int


def _lex(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if c == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == '"':
            start_line, start_col = line, col
            i += 1
            col += 1
            buf = []
            while i < n and text[i] != '"':
                ch = text[i]
                if ch == "\\" and i + 1 < n:
                    nxt = text[i + 1]
                    if nxt in ('"', "\\"):
                        buf.append(nxt)
                        i += 2
                        col += 2
                        continue
                if ch == "\n":
                    raise DomainParseError("syntax", "unterminated string", start_line, start_col)
                buf.append(ch)
                i += 1
                col += 1
            if i >= n:
                raise DomainParseError("syntax", "unterminated string", start_line, start_col)
            i += 1
            col += 1
            toks.append(_Tok("str", "".join(buf), start_line, start_col))
            continue
        if c == "?":
            start_col = col
            i += 1
            col += 1
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            if j == i:
                raise DomainParseError("syntax", "bare '?' is not a variable", line, start_col)
            toks.append(_Tok("var", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(_Tok("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(_Tok("sym", text[i:j], line, col))
            col += j - i
            i = j
            continue
        two = text[i:i + 2]
        if two in ("<=", ">=", "!="):
            toks.append(_Tok("punct", two, line, col))
            i += 2
            col += 2
            continue
        if c in "(){},;=+-*/<>":
            toks.append(_Tok("punct", c, line, col))
            i += 1
            col += 1
            continue
        raise DomainParseError("syntax", f"unexpected character {c!r}", line, col)
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.pos = 0

    def peek(self) -> _Tok:
        return self.toks[self.pos]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def fail(self, msg: str, tok: _Tok | None = None) -> DomainParseError:
        tok = tok or self.peek()
        return DomainParseError("syntax", msg, tok.line, tok.col)

    def expect_punct(self, val: str) -> _Tok:
        t = self.next()
        if t.typ != "punct" or t.val != val:
            raise self.fail(f"expected {val!r}, got {t.val!r}", t)
        return t

    def expect_keyword(self, word: str) -> _Tok:
        t = self.next()
        if t.typ != "sym" or t.val != word:
            raise self.fail(f"expected {word!r}, got {t.val!r}", t)
        return t

    def expect_name(self) -> _Tok:
        t = self.next()
        if t.typ != "sym":
            raise self.fail(f"expected a name, got {t.val!r}", t)
        if t.val in RESERVED:
            raise self.fail(f"{t.val!r} is a reserved word", t)
        return t

    def at_keyword(self, word: str) -> bool:
        t = self.peek()
        return t.typ == "sym" and t.val == word

    # terms ------------------------------------------------------------

    def parse_term(self) -> Term:
        t = self.next()
        if t.typ == "var":
            return Var(t.val)
        if t.typ == "str":
            return Text(t.val)
        if t.typ == "int" or (t.typ == "punct" and t.val == "-"):
            neg = False
            if t.typ == "punct":
                neg = True
                t = self.next()
                if t.typ != "int":
                    raise self.fail("expected an integer after '-'", t)
            num = -int(t.val) if neg else int(t.val)
            if self.peek().typ == "punct" and self.peek().val == "/":
                self.next()
                d = self.next()
                if d.typ != "int":
                    raise self.fail("expected a denominator", d)
                den = int(d.val)
                if den == 0:
                    raise self.fail("ratio with zero denominator", d)
                return make_ratio(num, den)
            return Int(num)
        if t.typ == "sym":
            if t.val == "true":
                return Bool(True)
            if t.val == "false":
                return Bool(False)
            if t.val in RESERVED:
                raise self.fail(f"{t.val!r} is a reserved word", t)
            return Sym(t.val)
        raise self.fail(f"expected a term, got {t.val!r}", t)

    def parse_head(self, require_parens: bool = False) -> TaskHead:
        name = self.expect_name()
        params: list[Term] = []
        if self.peek().typ == "punct" and self.peek().val == "(":
            self.next()
            if not (self.peek().typ == "punct" and self.peek().val == ")"):
                params.append(self.parse_term())
                while self.peek().typ == "punct" and self.peek().val == ",":
                    self.next()
                    params.append(self.parse_term())
            self.expect_punct(")")
        elif require_parens:
            raise self.fail("expected '('")
        return TaskHead(name.val, tuple(params))

    def parse_pattern(self) -> Pattern:
        head = self.parse_head(require_parens=True)
        return Pattern(head.name, head.params)

    # conditions ---------------------------------------------------------

    def parse_conditions(self) -> tuple:
        self.expect_punct("{")
        out: list = []
        while not (self.peek().typ == "punct" and self.peek().val == "}"):
            out.append(self.parse_condition())
            if self.peek().typ == "punct" and self.peek().val == ";":
                self.next()
            else:
                break
        self.expect_punct("}")
        return tuple(out)

    def parse_condition(self):
        if self.at_keyword("not"):
            self.next()
            return Negated(self.parse_pattern())
        if self.at_keyword("test"):
            self.next()
            self.expect_punct("(")
            left = self.parse_term()
            op_tok = self.next()
            if op_tok.typ != "punct" or op_tok.val not in ("=", "!=", "<", "<=", ">", ">="):
                raise self.fail(f"expected a comparison operator, got {op_tok.val!r}", op_tok)
            right = self.parse_term()
            self.expect_punct(")")
            return Test(op_tok.val, left, right)
        return Positive(self.parse_pattern())

    # expressions ----------------------------------------------------------

    def parse_expr(self) -> Expr:
        left = self.parse_expr_mul()
        while self.peek().typ == "punct" and self.peek().val in ("+", "-"):
            op = self.next().val
            right = self.parse_expr_mul()
            left = Bin(op, left, right)
        return left

    def parse_expr_mul(self) -> Expr:
        left = self.parse_expr_unary()
        while self.peek().typ == "punct" and self.peek().val in ("*", "/"):
            op = self.next().val
            right = self.parse_expr_unary()
            left = Bin(op, left, right)
        return left

    def parse_expr_unary(self) -> Expr:
        if self.peek().typ == "punct" and self.peek().val == "-":
            self.next()
            operand = self.parse_expr_unary()
            # fold a negated integer literal so "-5" round-trips as a literal
            if isinstance(operand, Lit) and isinstance(operand.value, Int):
                return Lit(Int(-operand.value.value))
            return Unary("-", operand)
        return self.parse_expr_atom()

    def parse_expr_atom(self) -> Expr:
        t = self.peek()
        if t.typ == "punct" and t.val == "(":
            self.next()
            e = self.parse_expr()
            self.expect_punct(")")
            return e
        if t.typ == "var":
            self.next()
            return Ref(t.val)
        if t.typ == "int":
            self.next()
            return Lit(Int(int(t.val)))
        if t.typ == "str":
            self.next()
            return Lit(Text(t.val))
        if t.typ == "sym":
            if t.val == "true":
                self.next()
                return Lit(Bool(True))
            if t.val == "false":
                self.next()
                return Lit(Bool(False))
            if t.val in CALL_ARITY:
                self.next()
                self.expect_punct("(")
                args = [self.parse_expr()]
                while self.peek().typ == "punct" and self.peek().val == ",":
                    self.next()
                    args.append(self.parse_expr())
                close = self.expect_punct(")")
                if len(args) != CALL_ARITY[t.val]:
                    raise DomainParseError(
                        "syntax", f"{t.val} takes {CALL_ARITY[t.val]} argument(s), got {len(args)}",
                        close.line, close.col,
                    )
                return Call(t.val, tuple(args))
            if t.val in RESERVED:
                raise self.fail(f"{t.val!r} is a reserved word", t)
            self.next()
            return Lit(Sym(t.val))
        raise self.fail(f"expected an expression, got {t.val!r}", t)

    # records ---------------------------------------------------------

    def parse_method(self) -> Method:
        name = self.expect_name()
        head = self.parse_head()
        ordering = SEQUENTIAL
        if self.at_keyword("unordered"):
            self.next()
            ordering = UNORDERED
        self.expect_punct("{")
        pre: tuple = ()
        if self.at_keyword("pre"):
            self.next()
            pre = self.parse_conditions()
        kw = self.expect_keyword("subtasks")
        self.expect_punct("{")
        subtasks: list[TaskHead] = []
        while not (self.peek().typ == "punct" and self.peek().val == "}"):
            subtasks.append(self.parse_head())
            if self.peek().typ == "punct" and self.peek().val == ";":
                self.next()
            else:
                break
        self.expect_punct("}")
        if not subtasks:
            raise DomainParseError("syntax", f"method {name.val} has no subtasks", kw.line, kw.col)
        skill = None
        if self.at_keyword("skill"):
            self.next()
            skill = self.expect_name().val
        self.expect_punct("}")
        return Method(name.val, head, pre, tuple(subtasks), ordering, skill)

    def parse_operator(self) -> Operator:
        name = self.expect_name()
        head = self.parse_head()
        self.expect_punct("{")
        pre: tuple = ()
        if self.at_keyword("pre"):
            self.next()
            pre = self.parse_conditions()
        self.expect_keyword("action")
        action_field = self.parse_term()
        self.expect_punct("=")
        value_expr = self.parse_expr()
        adds: list[Pattern] = []
        dels: list[Pattern] = []
        if self.at_keyword("effects"):
            self.next()
            self.expect_punct("{")
            while not (self.peek().typ == "punct" and self.peek().val == "}"):
                sign = self.next()
                if sign.typ != "punct" or sign.val not in ("+", "-"):
                    raise self.fail("expected '+' or '-' before an effect pattern", sign)
                pat = self.parse_pattern()
                (adds if sign.val == "+" else dels).append(pat)
                if self.peek().typ == "punct" and self.peek().val == ";":
                    self.next()
                else:
                    break
            self.expect_punct("}")
        skill = None
        if self.at_keyword("skill"):
            self.next()
            skill = self.expect_name().val
        self.expect_punct("}")
        return Operator(name.val, head, pre, ActionTemplate(action_field, value_expr), tuple(adds), tuple(dels), skill)

    def parse_axiom(self) -> Axiom:
        head = self.parse_pattern()
        self.expect_punct("{")
        self.expect_keyword("pre")
        pre = self.parse_conditions()
        self.expect_punct("}")
        return Axiom(head, pre)


def parse_domain(text: str) -> Domain:
    """Parse and load-check a domain file, raising DomainParseError with a
    position and an error kind on rejection."""
    p = _Parser(text)
    name: str | None = None
    skills: dict[str, str] = {}
    methods: list[Method] = []
    operators: list[Operator] = []
    axioms: list[Axiom] = []
    root: TaskHead | None = None

    while p.peek().typ != "eof":
        t = p.next()
        if t.typ != "sym":
            raise p.fail(f"expected a record keyword, got {t.val!r}", t)
        if t.val == "domain":
            if name is not None:
                raise DomainParseError("syntax", "duplicate domain record", t.line, t.col)
            name = p.expect_name().val
        elif t.val == "skill":
            sym = p.expect_name()
            display = p.next()
            if display.typ != "str":
                raise p.fail("expected a quoted display name", display)
            if sym.val in skills:
                raise DomainParseError("duplicate-name", f"skill {sym.val} declared twice", sym.line, sym.col)
            skills[sym.val] = display.val
        elif t.val == "root":
            if root is not None:
                raise DomainParseError("syntax", "duplicate root record", t.line, t.col)
            root = p.parse_head()
        elif t.val == "method":
            methods.append(p.parse_method())
        elif t.val == "operator":
            operators.append(p.parse_operator())
        elif t.val == "axiom":
            axioms.append(p.parse_axiom())
        else:
            raise p.fail(f"unknown record keyword {t.val!r}", t)

    if name is None:
        raise DomainParseError("missing-domain-name", "file does not declare a domain name")
    if root is None:
        raise DomainParseError("missing-root", f"domain {name} has no root record")

    _load_checks(name, skills, methods, operators, axioms)
    return Domain(name, skills, tuple(methods), tuple(operators), tuple(axioms), root)


def _load_checks(name, skills, methods, operators, axioms) -> None:
    method_heads = {m.head.name for m in methods}
    operator_heads = {o.head.name for o in operators}
    both = method_heads & operator_heads
    if both:
        raise DomainParseError("duplicate-head", f"task(s) achieved by both methods and operators: {', '.join(sorted(both))}")

    seen_names: set[str] = set()
    for rec in [*methods, *operators]:
        if rec.name in seen_names:
            raise DomainParseError("duplicate-name", f"record name {rec.name} used twice")
        seen_names.add(rec.name)

    for rec in [*methods, *operators]:
        if rec.skill is not None and rec.skill not in skills:
            raise DomainParseError("unknown-skill", f"{rec.name} references undeclared skill {rec.skill}")

    for rec in [*methods, *operators]:
        try:
            check_safety(list(rec.preconditions), initially_bound=rec.head.variables())
        except SafetyError as e:
            raise DomainParseError("unsafe-condition", f"in {rec.name}: {e}") from e
    for ax in axioms:
        try:
            check_safety(list(ax.preconditions))
        except SafetyError as e:
            raise DomainParseError("unsafe-condition", f"in axiom {ax.head.predicate}: {e}") from e
        positive_vars: set[str] = set()
        for c in ax.preconditions:
            if isinstance(c, Positive):
                positive_vars |= c.pattern.variables()
        free = ax.head.variables() - positive_vars
        if free:
            raise DomainParseError(
                "unsafe-condition",
                f"axiom {ax.head.predicate} head uses {', '.join(sorted('?' + v for v in free))} "
                "not bound by a positive precondition",
            )

    axiom_heads = {ax.head.predicate for ax in axioms}
    for ax in axioms:
        for c in ax.preconditions:
            if isinstance(c, Negated) and c.pattern.predicate in axiom_heads:
                raise DomainParseError(
                    "unstratified-negation",
                    f"axiom {ax.head.predicate} negates derived predicate {c.pattern.predicate}",
                )


# --- canonical serialization -------------------------------------------------

def _fmt_term(t: Term) -> str:
    if isinstance(t, Var):
        return f"?{t.name}"
    if isinstance(t, Sym):
        return t.name
    if isinstance(t, Int):
        return str(t.value)
    if isinstance(t, Bool):
        return "true" if t.value else "false"
    if isinstance(t, Text):
        escaped = t.value.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    # Ratio
    return f"{t.num}/{t.den}"


def _fmt_head(h: TaskHead) -> str:
    if not h.params:
        return h.name
    return f"{h.name}({', '.join(_fmt_term(t) for t in h.params)})"


def _fmt_pattern(pt: Pattern) -> str:
    return f"{pt.predicate}({', '.join(_fmt_term(t) for t in pt.args)})"


def _fmt_condition(c) -> str:
    if isinstance(c, Positive):
        return _fmt_pattern(c.pattern)
    if isinstance(c, Negated):
        return f"not {_fmt_pattern(c.pattern)}"
    if isinstance(c, Test):
        return f"test({_fmt_term(c.left)} {c.op} {_fmt_term(c.right)})"
    raise TypeError(f"not a condition: {c!r}")


def _fmt_expr(e: Expr) -> str:
    if isinstance(e, Lit):
        v = e.value
        if isinstance(v, Int) and v.value < 0:
            return f"({v.value})"
        return _fmt_term(v)
    if isinstance(e, Ref):
        return f"?{e.name}"
    if isinstance(e, Unary):
        return f"(- {_fmt_expr(e.operand)})"
    if isinstance(e, Bin):
        return f"({_fmt_expr(e.left)} {e.op} {_fmt_expr(e.right)})"
    if isinstance(e, Call):
        return f"{e.fn}({', '.join(_fmt_expr(a) for a in e.args)})"
    raise TypeError(f"not an expression: {e!r}")


def _fmt_pre(pre: tuple, indent: str) -> list[str]:
    if not pre:
        return []
    inner = "; ".join(_fmt_condition(c) for c in pre)
    return [f"{indent}pre {{ {inner} }}"]


def serialize_domain(d: Domain) -> str:
    """Canonical text form: records sorted within each section. Parsing the
    output of serialize_domain reproduces a domain whose record order is the
    sorted order."""
    lines: list[str] = [f"domain {d.name}", ""]
    for sym in sorted(d.skills):
        lines.append(f'skill {sym} {_fmt_term(Text(d.skills[sym]))}')
    if d.skills:
        lines.append("")
    lines.append(f"root {_fmt_head(d.root_schema)}")
    lines.append("")
    for m in sorted(d.methods, key=lambda m: m.name):
        flag = " unordered" if m.ordering == UNORDERED else ""
        lines.append(f"method {m.name} {_fmt_head(m.head)}{flag} {{")
        lines.extend(_fmt_pre(m.preconditions, "  "))
        lines.append(f"  subtasks {{ {'; '.join(_fmt_head(s) for s in m.subtasks)} }}")
        if m.skill:
            lines.append(f"  skill {m.skill}")
        lines.append("}")
        lines.append("")
    for o in sorted(d.operators, key=lambda o: o.name):
        lines.append(f"operator {o.name} {_fmt_head(o.head)} {{")
        lines.extend(_fmt_pre(o.preconditions, "  "))
        lines.append(f"  action {_fmt_term(o.action.field)} = {_fmt_expr(o.action.value_expr)}")
        effects = [f"+{_fmt_pattern(p)}" for p in o.add_effects] + [f"-{_fmt_pattern(p)}" for p in o.del_effects]
        if effects:
            lines.append(f"  effects {{ {'; '.join(effects)} }}")
        if o.skill:
            lines.append(f"  skill {o.skill}")
        lines.append("}")
        lines.append("")
    for ax in sorted(d.axioms, key=lambda a: (a.head.predicate, _fmt_pattern(a.head))):
        lines.append(f"axiom {_fmt_pattern(ax.head)} {{")
        # the grammar requires an axiom pre block even when it is empty
        lines.extend(_fmt_pre(ax.preconditions, "  ") or ["  pre { }"])
        lines.append("}")
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"

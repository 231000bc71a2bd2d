"""Scenario files: the sectioned text format describing one chart action.

A scenario fixes the graded ring, its relations, the graded Lie algebra
with brackets, the derivation table and the computation options.  Parsing
gives line/column diagnostics; semantic validation reuses the derivation
action validator and reports the offending source line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from uhat.rings import GradedRing, Ideal, PresentedAlgebra, Polynomial
from uhat.lie import DerivationAction, GradedLieAlgebra


class ScenarioError(Exception):
    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)
        self.line = line
        self.column = column


# ---------------------------------------------------------------------------
# polynomial expressions


class _Tokens:
    def __init__(self, text, line=None):
        self.text = text
        self.line = line
        self.pos = 0

    def error(self, message):
        raise ScenarioError(message, self.line, self.pos + 1)

    def peek(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1
        if self.pos >= len(self.text):
            return None
        return self.text[self.pos]

    def take_name(self):
        start = self.pos
        while self.pos < len(self.text) and (
            self.text[self.pos].isalnum() or self.text[self.pos] in "_@"
        ):
            self.pos += 1
        return self.text[start : self.pos]

    def take_int(self):
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.error("expected an integer")
        return int(self.text[start : self.pos])


def parse_polynomial(text, ring, line=None):
    """Parse infix polynomial syntax: +, -, *, ^ and rationals p/q."""
    toks = _Tokens(text, line)

    def atom():
        c = toks.peek()
        if c is None:
            toks.error("unexpected end of expression")
        if c == "(":
            toks.pos += 1
            e = expr()
            if toks.peek() != ")":
                toks.error("expected ')'")
            toks.pos += 1
            return e
        if c.isdigit():
            num = toks.take_int()
            if toks.peek() == "/":
                toks.pos += 1
                den = toks.take_int()
                if den == 0:
                    toks.error("zero denominator")
                return ring.const(Fraction(num, den))
            return ring.const(num)
        if c.isalpha() or c in "_@":
            name = toks.take_name()
            if name not in ring._index:
                toks.error(f"unknown variable {name!r}")
            return ring.var(name)
        toks.error(f"unexpected character {c!r}")

    def factor():
        base = atom()
        if toks.peek() == "^":
            toks.pos += 1
            if toks.peek() is None or not toks.peek().isdigit():
                toks.error("expected an integer exponent")
            return base ** toks.take_int()
        return base

    def term():
        out = factor()
        while toks.peek() == "*":
            toks.pos += 1
            out = out * factor()
        return out

    def expr():
        sign = 1
        if toks.peek() == "-":
            toks.pos += 1
            sign = -1
        elif toks.peek() == "+":
            toks.pos += 1
        out = term() * sign
        while toks.peek() in ("+", "-"):
            op = toks.peek()
            toks.pos += 1
            nxt = term()
            out = out + nxt if op == "+" else out - nxt
        return out

    result = expr()
    if toks.peek() is not None:
        toks.error(f"trailing input {toks.text[toks.pos:]!r}")
    return result


def format_polynomial(p):
    return str(p)


# ---------------------------------------------------------------------------
# the scenario structure


@dataclass
class Options:
    degree_bound: int = 8
    pbw_bound: int = 6
    reduced: bool = True
    sample_count: int = 20
    seed: int = 1
    j_search_degree: int = 0


@dataclass
class Scenario:
    variables: list  # (name, weight)
    order: str
    relations: list  # source strings
    lie_weights: list
    lie_basis: list  # list of name lists per weight
    brackets: dict  # (a, b) -> {name: Fraction}
    action_table: dict  # vector name -> {generator: source string}
    options: Options = field(default_factory=Options)

    def ring(self):
        return GradedRing(
            [n for n, _ in self.variables], [w for _, w in self.variables], self.order
        )

    def build(self):
        """Construct and validate the derivation action; raise on violations."""
        ring = self.ring()
        rels = [parse_polynomial(s, ring) for s in self.relations]
        algebra = PresentedAlgebra(ring, Ideal(ring, rels))
        if self.lie_weights:
            # a graded action needs weight-homogeneous relations: every
            # weight component of a generator must itself lie in the ideal
            for src, rel in zip(self.relations, rels):
                for w, comp in rel.weight_decompose().items():
                    if not algebra.is_zero(comp):
                        raise ScenarioError(
                            f"relation {src!r} is not weight-homogeneous: its "
                            f"weight {w} component is not in the ideal"
                        )
        lie = GradedLieAlgebra(self.lie_weights, self.lie_basis, self.brackets)
        table = {}
        for name, row in self.action_table.items():
            if name not in lie._index:
                raise ScenarioError(f"unknown basis vector {name!r} in action table")
            table[name] = {g: parse_polynomial(s, ring) for g, s in row.items()}
        action = DerivationAction(algebra, lie, table)
        violations = action.validate()
        if violations:
            first = violations[0]
            raise ScenarioError(f"invalid scenario: {first}")
        return action


def parse_scenario(text):
    """Parse the sectioned scenario format with positioned diagnostics."""
    section = None
    variables = []
    order = "degrevlex"
    relations = []
    lie_weights = []
    lie_basis = []
    brackets = {}
    action_table = {}
    options = Options()
    seen_sections = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in ("ring", "relations", "lie", "action", "options"):
                raise ScenarioError(f"unknown section [{section}]", lineno)
            if section in seen_sections:
                raise ScenarioError(f"duplicate section [{section}]", lineno)
            seen_sections.add(section)
            continue
        if section is None:
            raise ScenarioError("content before the first section", lineno)
        if section == "ring":
            if line.lower().startswith("variables:"):
                body = line.split(":", 1)[1]
                for chunk in body.split(","):
                    chunk = chunk.strip()
                    if not chunk:
                        continue
                    if ":" not in chunk:
                        raise ScenarioError(f"expected name:weight, got {chunk!r}", lineno)
                    name, wtext = chunk.split(":", 1)
                    name = name.strip()
                    try:
                        w = int(wtext.strip())
                    except ValueError:
                        raise ScenarioError(f"bad weight {wtext.strip()!r}", lineno)
                    if w > 0:
                        raise ScenarioError(
                            f"variable {name!r} has positive weight {w}; chart weights must be <= 0",
                            lineno,
                        )
                    variables.append((name, w))
            elif line.lower().startswith("order:"):
                order = line.split(":", 1)[1].strip()
            else:
                raise ScenarioError(f"unexpected ring entry {line!r}", lineno)
        elif section == "relations":
            relations.append((line, lineno))
        elif section == "lie":
            if line.lower().startswith("weight "):
                head, _, names = line.partition(":")
                try:
                    w = int(head.split()[1])
                except (IndexError, ValueError):
                    raise ScenarioError("expected 'weight <int>: names'", lineno)
                block = [n.strip() for n in names.split(",") if n.strip()]
                lie_weights.append(w)
                lie_basis.append(block)
            elif line.lower().startswith("bracket"):
                body = line[len("bracket") :].strip()
                if "=" not in body or not body.startswith("["):
                    raise ScenarioError("expected 'bracket [a, b] = combination'", lineno)
                pair, _, combo_text = body.partition("=")
                pair = pair.strip()
                if not (pair.startswith("[") and pair.endswith("]")):
                    raise ScenarioError("expected '[a, b]' on the left", lineno)
                names = [n.strip() for n in pair[1:-1].split(",")]
                if len(names) != 2:
                    raise ScenarioError("brackets take exactly two arguments", lineno)
                combo = _parse_combination(combo_text.strip(), lineno)
                brackets[(names[0], names[1])] = combo
            else:
                raise ScenarioError(f"unexpected lie entry {line!r}", lineno)
        elif section == "action":
            if "=" not in line or "." not in line.split("=", 1)[0]:
                raise ScenarioError("expected 'vector.generator = polynomial'", lineno)
            lhs, _, rhs = line.partition("=")
            vec, _, gen = lhs.strip().partition(".")
            vec, gen = vec.strip(), gen.strip()
            action_table.setdefault(vec, {})
            if gen in action_table[vec]:
                raise ScenarioError(f"duplicate action entry {vec}.{gen}", lineno)
            action_table[vec][gen] = (rhs.strip(), lineno)
        elif section == "options":
            if "=" not in line:
                raise ScenarioError("expected 'key = value'", lineno)
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            try:
                if key == "degree_bound":
                    options.degree_bound = int(val)
                elif key == "pbw_bound":
                    options.pbw_bound = int(val)
                elif key == "sample_count":
                    options.sample_count = int(val)
                elif key == "seed":
                    options.seed = int(val)
                elif key == "j_search_degree":
                    options.j_search_degree = int(val)
                elif key == "reduced":
                    if val.lower() not in ("true", "false"):
                        raise ValueError(val)
                    options.reduced = val.lower() == "true"
                else:
                    raise ScenarioError(f"unknown option {key!r}", lineno)
            except ValueError:
                raise ScenarioError(f"bad value {val!r} for option {key!r}", lineno)

    if not variables:
        raise ScenarioError("missing [ring] variables")

    ring = GradedRing([n for n, _ in variables], [w for _, w in variables], order)
    parsed_relations = []
    for src, lineno in relations:
        parse_polynomial(src, ring, lineno)
        parsed_relations.append(src)
    try:
        lie = GradedLieAlgebra(lie_weights, lie_basis, {})
    except ValueError as exc:
        raise ScenarioError(f"bad lie block: {exc}")
    for (a, b), combo in brackets.items():
        for name in (a, b, *combo):
            if name not in lie._index:
                raise ScenarioError(f"unknown basis vector {name!r} in bracket")
    table = {}
    for vec, row in action_table.items():
        if vec not in lie._index:
            raise ScenarioError(f"unknown basis vector {vec!r} in action table")
        table[vec] = {}
        for gen, (src, lineno) in row.items():
            if gen not in ring._index:
                raise ScenarioError(f"unknown ring generator {gen!r}", lineno)
            parse_polynomial(src, ring, lineno)
            table[vec][gen] = src
    return Scenario(
        variables=variables,
        order=order,
        relations=parsed_relations,
        lie_weights=lie_weights,
        lie_basis=lie_basis,
        brackets=brackets,
        action_table=table,
        options=options,
    )


def _parse_combination(text, lineno):
    """Rational linear combination of basis names, e.g. '1/2 c + d - e'."""
    if text == "0":
        return {}
    toks = _Tokens(text, lineno)
    combo = {}
    sign = 1
    while True:
        c = toks.peek()
        if c is None:
            break
        if c == "+":
            toks.pos += 1
            sign = 1
            continue
        if c == "-":
            toks.pos += 1
            sign = -1
            continue
        coeff = Fraction(1)
        if c.isdigit():
            num = toks.take_int()
            if toks.peek() == "/":
                toks.pos += 1
                coeff = Fraction(num, toks.take_int())
            else:
                coeff = Fraction(num)
            if toks.peek() == "*":
                toks.pos += 1
        c = toks.peek()
        if c is None or not (c.isalpha() or c == "_"):
            toks.error("expected a basis vector name")
        name = toks.take_name()
        combo[name] = combo.get(name, Fraction(0)) + sign * coeff
        sign = 1
    return {k: v for k, v in combo.items() if v}


def serialize_scenario(s):
    """Text form; parsing it back yields an identical Scenario."""
    out = ["[ring]"]
    out.append("variables: " + ", ".join(f"{n}:{w}" for n, w in s.variables))
    out.append(f"order: {s.order}")
    out.append("")
    out.append("[relations]")
    out.extend(s.relations)
    out.append("")
    out.append("[lie]")
    for w, block in zip(s.lie_weights, s.lie_basis):
        out.append(f"weight {w}: " + ", ".join(block))
    for (a, b), combo in sorted(s.brackets.items()):
        parts = []
        for name, v in sorted(combo.items()):
            sign = "-" if v < 0 else "+"
            mag = abs(v)
            body = name if mag == 1 else f"{mag} {name}"
            parts.append((sign, body))
        if not parts:
            body = "0"
        else:
            body = ("-" if parts[0][0] == "-" else "") + parts[0][1]
            for sign, chunk in parts[1:]:
                body += f" {sign} {chunk}"
        out.append(f"bracket [{a}, {b}] = {body}")
    out.append("")
    out.append("[action]")
    for vec in sorted(s.action_table):
        for gen in sorted(s.action_table[vec]):
            out.append(f"{vec}.{gen} = {s.action_table[vec][gen]}")
    out.append("")
    out.append("[options]")
    o = s.options
    out.append(f"degree_bound = {o.degree_bound}")
    out.append(f"pbw_bound = {o.pbw_bound}")
    out.append(f"reduced = {'true' if o.reduced else 'false'}")
    out.append(f"sample_count = {o.sample_count}")
    out.append(f"seed = {o.seed}")
    out.append(f"j_search_degree = {o.j_search_degree}")
    return "\n".join(out) + "\n"


def load_scenario(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())

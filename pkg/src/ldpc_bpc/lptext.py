"""Reader and generic solver for the text LP files this package writes.

Covers the subset of the LP file dialect used by the exporter: a single
objective (optionally with a constant term), 'Subject To' rows with =, <=
or >=, a Bounds section, Binaries/Generals sections, and End. Solving is
always over the continuous relaxation; integrality sections only tag
variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .lp import INFEASIBLE, OPTIMAL, RevisedSimplex

_SECTIONS = {
    "minimize": "objective",
    "maximize": "objective",
    "subject": "constraints",
    "st": "constraints",
    "bounds": "bounds",
    "binaries": "binaries",
    "binary": "binaries",
    "generals": "generals",
    "general": "generals",
    "end": "end",
}

_TERM = re.compile(r"([+-]?)\s*(\d+(?:\.\d+)?(?:[eE][+-]?\d+)?)?\s*([A-Za-z_][\w.]*)?")


@dataclass
class LpModel:
    sense: str = "min"
    objective: dict = field(default_factory=dict)
    constant: float = 0.0
    constraints: list = field(default_factory=list)  # (name, {var: coef}, op, rhs)
    lower: dict = field(default_factory=dict)
    upper: dict = field(default_factory=dict)
    binaries: set = field(default_factory=set)
    generals: set = field(default_factory=set)

    def variables(self) -> list[str]:
        seen = dict.fromkeys(self.objective)
        for _, coefs, _, _ in self.constraints:
            seen.update(dict.fromkeys(coefs))
        for name in (*self.lower, *self.upper, *self.binaries, *self.generals):
            seen.setdefault(name, None)
        return list(seen)


def _parse_expression(text: str):
    """Linear expression -> (coefficient dict, constant)."""
    coefs: dict[str, float] = {}
    constant = 0.0
    pos = 0
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            if text[pos].isspace():
                pos += 1
                continue
            raise ValueError(f"cannot parse expression near {text[pos:pos + 20]!r}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        num = float(m.group(2)) if m.group(2) else 1.0
        var = m.group(3)
        if var is None and m.group(2) is None:
            raise ValueError(f"dangling sign in expression {text!r}")
        if var is None:
            constant += sign * num
        else:
            coefs[var] = coefs.get(var, 0.0) + sign * num
        pos = m.end()
    return coefs, constant


def parse_lp_text(text: str) -> LpModel:
    model = LpModel()
    section = None
    buffer: list[str] = []

    def flush_objective():
        if section == "objective" and buffer:
            joined = " ".join(buffer)
            joined = joined.split(":", 1)[1] if ":" in joined else joined
            coefs, const = _parse_expression(joined)
            model.objective = coefs
            model.constant = const
            buffer.clear()

    for raw in text.splitlines():
        line = raw.split("\\")[0].strip()
        if not line:
            continue
        head = line.split()[0].lower().rstrip(":")
        if head in _SECTIONS and (head != "st" or line.lower().startswith("st")):
            flush_objective()
            section = _SECTIONS[head]
            if section == "objective":
                model.sense = "max" if head == "maximize" else "min"
            rest = line.split(None, 2)
            if section == "constraints" and head == "subject":
                continue
            if len(rest) > 1 and section == "objective":
                buffer.append(line.split(None, 1)[1])
            continue
        if section == "objective":
            buffer.append(line)
        elif section == "constraints":
            name = None
            if ":" in line:
                name, line = line.split(":", 1)
                name = name.strip()
            m = re.search(r"(<=|>=|=)", line)
            if not m:
                raise ValueError(f"constraint without relation: {line!r}")
            op = m.group(1)
            lhs, rhs_text = line.split(op, 1)
            coefs, const = _parse_expression(lhs)
            rhs = float(rhs_text) - const
            model.constraints.append((name, coefs, op, rhs))
        elif section == "bounds":
            toks = line.replace("<=", " <= ").replace(">=", " >= ").split()
            if len(toks) == 2 and toks[1].lower() == "free":
                model.lower[toks[0]] = -np.inf
                model.upper[toks[0]] = np.inf
            elif len(toks) == 3 and toks[1] == "<=":
                model.upper[toks[0]] = float(toks[2])
            elif len(toks) == 3 and toks[1] == ">=":
                model.lower[toks[0]] = float(toks[2])
            elif len(toks) == 5 and toks[1] == "<=" and toks[3] == "<=":
                model.lower[toks[2]] = float(toks[0])
                model.upper[toks[2]] = float(toks[4])
            else:
                raise ValueError(f"unsupported bounds line: {line!r}")
        elif section == "binaries":
            model.binaries.update(line.split())
        elif section == "generals":
            model.generals.update(line.split())
        elif section == "end":
            break
        else:
            raise ValueError(f"content before any section: {line!r}")
    flush_objective()
    return model


def solve_lp_relaxation(model: LpModel):
    """Solve the continuous relaxation of a parsed model with the in-repo
    simplex. Returns (status, objective incl. constant, {var: value})."""
    names = model.variables()
    index = {name: k for k, name in enumerate(names)}
    rhs = [r for (_, _, _, r) in model.constraints]
    eng = RevisedSimplex(rhs)
    sign = 1.0 if model.sense == "min" else -1.0
    entries: list[list[int]] = [[] for _ in names]
    coefrows: list[list[float]] = [[] for _ in names]
    for row, (_, coefs, _, _) in enumerate(model.constraints):
        for var, coef in coefs.items():
            entries[index[var]].append(row)
            coefrows[index[var]].append(coef)
    for k, name in enumerate(names):
        lb = model.lower.get(name, 0.0)
        ub = model.upper.get(name, np.inf)
        if name in model.binaries:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        obj = sign * model.objective.get(name, 0.0)
        eng.add_var(entries[k], coefrows[k], obj, lb, ub)
    for row, (_, _, op, _) in enumerate(model.constraints):
        if op == "<=":
            eng.add_var([row], [1.0], 0.0, 0.0, np.inf)
        elif op == ">=":
            eng.add_var([row], [-1.0], 0.0, 0.0, np.inf)
    status = eng.solve()
    if status == INFEASIBLE:
        return status, None, None
    x = eng.x()
    values = {name: float(x[index[name]]) for name in names}
    obj = sign * eng.objective + model.constant
    assert status == OPTIMAL
    return status, obj, values

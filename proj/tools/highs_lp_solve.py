#!/usr/bin/env python3
# Copyright 2026 The optsynth Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Solve an LP file with HiGHS and write a plain-text result file.

Usage: highs_lp_solve.py INPUT.lp OUTPUT.txt TIME_LIMIT

The result file holds "status: <text>", "objective: <value>" and one
"var <name> <value>" line per column. HiGHS does not read indicator rows,
so they are cut out of the file and added back as big-M rows with M taken
from the column bounds.
"""

import math
import os
import re
import sys
import tempfile

import highspy

SECTION = re.compile(
    r"^\s*(minimi[sz]e|maximi[sz]e|min|max|subject\s+to|such\s+that|st|s\.t\.|"
    r"bounds?|binar(y|ies)|bin|generals?|gen|integers|end)\s*$",
    re.IGNORECASE,
)
INDICATOR = re.compile(r"^\s*(?:([^\s:]+)\s*:)?\s*([A-Za-z_][\w.]*)\s*=\s*([01])\s*->(.*)$")
ROW_END = re.compile(r"(<=|>=|=<|=>|<|>|=)\s*([-+]?\s*(?:[\d.]+(?:[eE][-+]?\d+)?|inf(?:inity)?))\s*$",
                     re.IGNORECASE)
TERM = re.compile(r"([-+])?\s*(\d[\d.]*(?:[eE][-+]?\d+)?)?\s*([A-Za-z_][\w.]*)")
FALLBACK_M = 1e6


def split_indicators(text):
    """Return (text without indicator rows, list of (guard, value, body))."""
    kept, indicators = [], []
    section = None
    pending = None
    for line in text.splitlines():
        content = line.split("\\", 1)[0]
        if pending is not None:
            pending += " " + content
            if ROW_END.search(pending):
                indicators.append(pending)
                pending = None
            continue
        m = SECTION.match(content)
        if m:
            section = m.group(1).lower().replace(" ", "")
        elif section in ("subjectto", "suchthat", "st", "s.t.") and INDICATOR.match(content):
            if ROW_END.search(content):
                indicators.append(content)
            else:
                pending = content
            continue
        kept.append(line)
    parsed = []
    for row in indicators:
        m = INDICATOR.match(row)
        guard, value, rest = m.group(2), int(m.group(3)), m.group(4)
        end = ROW_END.search(rest)
        body, rel = rest[: end.start()], end.group(1)
        rhs = float(end.group(2).replace(" ", ""))
        if "[" in body:
            raise ValueError("quadratic indicator rows are not supported")
        terms = []
        for t in TERM.finditer(body):
            sign = -1.0 if t.group(1) == "-" else 1.0
            coef = float(t.group(2)) if t.group(2) else 1.0
            terms.append((t.group(3), sign * coef))
        rel = {"=<": "<=", "<": "<=", "=>": ">=", ">": ">="}.get(rel, rel)
        parsed.append((guard, value, terms, rel, rhs))
    return "\n".join(kept) + "\n", parsed


def column_index(h, name, integer_names):
    lp = h.getLp()
    names = list(lp.col_names_)
    if name in names:
        return names.index(name)
    h.addCol(0.0, 0.0, highspy.kHighsInf, 0, [], [])
    idx = h.getNumCol() - 1
    h.passColName(idx, name)
    if name in integer_names:
        h.changeColIntegrality(idx, highspy.HighsVarType.kInteger)
    return idx


def add_big_m_rows(h, indicators, integer_names):
    inf = highspy.kHighsInf
    for guard, value, terms, rel, rhs in indicators:
        cols = [column_index(h, name, integer_names) for name, _ in terms]
        g = column_index(h, guard, integer_names)
        lp = h.getLp()
        lo, hi = 0.0, 0.0
        for c, (_, a) in zip(cols, terms):
            bl, bu = lp.col_lower_[c], lp.col_upper_[c]
            lo += min(a * bl, a * bu) if math.isfinite(bl) and math.isfinite(bu) else (
                a * bl if a > 0 and math.isfinite(bl) else a * bu if a < 0 and math.isfinite(bu) else -math.inf)
            hi += max(a * bl, a * bu) if math.isfinite(bl) and math.isfinite(bu) else (
                a * bu if a > 0 and math.isfinite(bu) else a * bl if a < 0 and math.isfinite(bl) else math.inf)
        values = [a for _, a in terms]
        # active when guard == value: slack term is M * (1 - y) or M * y
        for sense in (("<=",) if rel == "<=" else (">=",) if rel == ">=" else ("<=", ">=")):
            if sense == "<=":
                m = hi - rhs if math.isfinite(hi) else FALLBACK_M
                m = max(m, 0.0)
                if value == 1:
                    h.addRow(-inf, rhs + m, len(cols) + 1, cols + [g], values + [m])
                else:
                    h.addRow(-inf, rhs, len(cols) + 1, cols + [g], values + [-m])
            else:
                m = rhs - lo if math.isfinite(lo) else FALLBACK_M
                m = max(m, 0.0)
                if value == 1:
                    h.addRow(rhs - m, inf, len(cols) + 1, cols + [g], values + [-m])
                else:
                    h.addRow(rhs, inf, len(cols) + 1, cols + [g], values + [m])


def integer_section_names(text):
    names, section = set(), None
    for line in text.splitlines():
        content = line.split("\\", 1)[0]
        m = SECTION.match(content)
        if m:
            section = m.group(1).lower()
            continue
        if section and section.startswith(("bin", "gen", "integers")):
            names.update(content.split())
    return names


def main(argv):
    if len(argv) != 4:
        sys.stderr.write(__doc__)
        return 2
    src, dst, time_limit = argv[1], argv[2], float(argv[3])
    with open(src, encoding="utf-8") as f:
        text = f.read()
    try:
        stripped, indicators = split_indicators(text)
    except ValueError as e:
        with open(dst, "w", encoding="utf-8") as f:
            f.write(f"status: error\nmessage: {e}\n")
        return 1

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("time_limit", time_limit)
    with tempfile.NamedTemporaryFile("w", suffix=".lp", delete=False, encoding="utf-8") as tmp:
        tmp.write(stripped)
        path = tmp.name
    try:
        status = h.readModel(path)
    finally:
        os.unlink(path)
    if status == highspy.HighsStatus.kError:
        with open(dst, "w", encoding="utf-8") as f:
            f.write("status: error\nmessage: HiGHS could not read the model\n")
        return 1
    add_big_m_rows(h, indicators, integer_section_names(text))
    h.run()
    model_status = h.modelStatusToString(h.getModelStatus())
    lines = [f"status: {model_status}"]
    if h.getModelStatus() == highspy.HighsModelStatus.kOptimal:
        lines.append(f"objective: {h.getInfo().objective_function_value!r}")
        names = h.getLp().col_names_
        for name, value in zip(names, h.getSolution().col_value):
            lines.append(f"var {name} {value!r}")
    with open(dst, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))

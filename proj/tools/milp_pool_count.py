#!/usr/bin/env python3
"""Count the solutions with f > eps of an exported region-counting model.

Reads the LP file written by `regions export-milp`, solves it with HiGHS via
scipy.optimize.milp, and enumerates the solution pool with no-good cuts on the
binaries until the best remaining f drops to eps or below.

Exit codes: 0 on success, 1 on bad input, 4 when scipy's MILP solver is
unavailable.
"""

import argparse
import math
import re
import sys

try:
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp
except ImportError:  # pragma: no cover
    print("scipy with milp() is required", file=sys.stderr)
    sys.exit(4)

NUMBER = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$|^[+-]?inf$")


def parse_number(token):
    if token in ("+inf", "inf"):
        return math.inf
    if token == "-inf":
        return -math.inf
    return float(token)


def parse_lp(text):
    section = None
    objective = None
    rows = []
    bounds = {}
    binaries = []
    names = []

    def declare(name):
        if name not in bounds:
            bounds[name] = (0.0, math.inf)
            names.append(name)

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        lowered = line.lower()
        if lowered in ("maximize", "subject to", "bounds", "binaries", "end"):
            section = lowered
            continue
        if section == "maximize":
            objective = line.split(":", 1)[1].strip()
            declare(objective)
        elif section == "subject to":
            name, body = line.split(":", 1)
            tokens = body.split()
            terms = {}
            sign, coeff = 1.0, 1.0
            i = 0
            while tokens[i] not in ("<=", ">=", "="):
                tok = tokens[i]
                if tok in ("+", "-"):
                    sign = -1.0 if tok == "-" else 1.0
                elif NUMBER.match(tok):
                    coeff = float(tok)
                else:
                    declare(tok)
                    terms[tok] = terms.get(tok, 0.0) + sign * coeff
                    sign, coeff = 1.0, 1.0
                i += 1
            rows.append((name.strip(), terms, tokens[i], parse_number(tokens[i + 1])))
        elif section == "bounds":
            tokens = line.split()
            if len(tokens) == 2 and tokens[1] == "free":
                declare(tokens[0])
                bounds[tokens[0]] = (-math.inf, math.inf)
            elif len(tokens) == 5 and tokens[1] == "<=" and tokens[3] == "<=":
                declare(tokens[2])
                bounds[tokens[2]] = (parse_number(tokens[0]), parse_number(tokens[4]))
            else:
                raise ValueError(f"unsupported bound line: {line}")
        elif section == "binaries":
            declare(line)
            bounds[line] = (0.0, 1.0)
            binaries.append(line)
    if objective is None:
        raise ValueError("no objective")
    return objective, rows, bounds, binaries, names


def count_solutions(text, eps, limit):
    objective, rows, bounds, binaries, names = parse_lp(text)
    index = {n: k for k, n in enumerate(names)}
    n = len(names)
    c = np.zeros(n)
    c[index[objective]] = -1.0  # milp minimizes
    integrality = np.zeros(n)
    for b in binaries:
        integrality[index[b]] = 1
    lower = np.array([bounds[v][0] for v in names])
    upper = np.array([bounds[v][1] for v in names])

    A, lo, hi = [], [], []
    for _, terms, sense, rhs in rows:
        row = np.zeros(n)
        for v, a in terms.items():
            row[index[v]] += a
        A.append(row)
        lo.append(rhs if sense in (">=", "=") else -np.inf)
        hi.append(rhs if sense in ("<=", "=") else np.inf)

    count = 0
    while count < limit:
        constraints = LinearConstraint(np.array(A), np.array(lo), np.array(hi))
        result = milp(c, constraints=constraints, integrality=integrality, bounds=Bounds(lower, upper),
                      options={"mip_rel_gap": 0.0})
        if result.status != 0 or -result.fun <= eps:
            break
        count += 1
        # Exclude this assignment of the binaries.
        cut = np.zeros(n)
        ones = 0
        for b in binaries:
            if result.x[index[b]] > 0.5:
                cut[index[b]] = -1.0
                ones += 1
            else:
                cut[index[b]] = 1.0
        A.append(cut)
        lo.append(1.0 - ones)
        hi.append(np.inf)
    return count


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("model", help="LP file written by regions export-milp")
    parser.add_argument("--epsilon", type=float, default=1e-6)
    parser.add_argument("--limit", type=int, default=100000)
    args = parser.parse_args()
    try:
        with open(args.model, encoding="utf-8") as handle:
            text = handle.read()
        print(count_solutions(text, args.epsilon, args.limit))
    except (OSError, ValueError, KeyError, IndexError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command line driver: analyze, quotient, blowup and identities.

Exit codes: 0 success, 1 condition refusal, 2 input error, 3 bound
exhaustion.  Reports are printed as indented text and can additionally be
written as JSON; for a fixed scenario and seed they are byte-identical
across runs.
"""

from __future__ import annotations

import argparse
import json
import random
import sys

from uhat import blowup as bl
from uhat import infinitesimal as inf
from uhat import quotient as qt
from uhat.lie import (
    GradedLieAlgebra,
    comult_coefficients,
    verify_commutator_identity,
    verify_weighted_bracket_identity,
)
from uhat.scenario import ScenarioError, load_scenario

EXIT_OK = 0
EXIT_REFUSED = 1
EXIT_INPUT = 2
EXIT_BOUND = 3


def _render(node, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(node, dict):
        for key, val in node.items():
            if isinstance(val, (dict, list)) and val:
                lines.append(f"{pad}{key}:")
                lines.extend(_render(val, indent + 1))
            else:
                lines.append(f"{pad}{key}: {_scalar(val)}")
    elif isinstance(node, list):
        for val in node:
            if isinstance(val, (dict, list)):
                lines.append(f"{pad}-")
                lines.extend(_render(val, indent + 1))
            else:
                lines.append(f"{pad}- {_scalar(val)}")
    else:
        lines.append(f"{pad}{_scalar(node)}")
    return lines


def _scalar(val):
    if isinstance(val, bool):
        return "true" if val else "false"
    if val is None:
        return "none"
    if isinstance(val, (list, dict)) and not val:
        return "[]" if isinstance(val, list) else "{}"
    return str(val)


def _jsonable(node):
    if isinstance(node, dict):
        return {str(k): _jsonable(v) for k, v in node.items()}
    if isinstance(node, (list, tuple)):
        return [_jsonable(v) for v in node]
    if isinstance(node, bool) or node is None or isinstance(node, int):
        return node
    return str(node)


def emit(report, json_path):
    print("\n".join(_render(report)))
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(_jsonable(report), fh, indent=2)
            fh.write("\n")


def _load(args):
    scenario = load_scenario(args.scenario)
    if args.degree_bound is not None:
        scenario.options.degree_bound = args.degree_bound
    if args.pbw_bound is not None:
        scenario.options.pbw_bound = args.pbw_bound
    if args.seed is not None:
        scenario.options.seed = args.seed
    action = scenario.build()
    return scenario, action


def _analysis(scenario, action):
    report = {"scenario": None, "levels": {}}
    chains, ks = bl.level_fitting_data(action)
    for i in range(1, action.lie.nlevels + 1):
        chain = chains[i]
        k = ks[i - 1]
        report["levels"][f"level_{i}"] = {
            "weight": action.lie.weights[i - 1],
            "rank": chain.target_rank,
            "k": k,
            "fitting_ideals": {
                f"fit_{j}": [str(g) for g in chain.ideal(j).generators]
                for j in range(-1, chain.target_rank + 1)
            },
        }
    ss, cert = inf.check_ss_eq_s(action)
    cdrs = inf.check_cdrs(action)
    rng = random.Random(scenario.options.seed)
    wuu, winfo = bl.check_wuu(
        action,
        reduced=scenario.options.reduced,
        rng=rng,
        sample_count=scenario.options.sample_count,
    )
    report["k_vector"] = list(ks)
    report["ss_eq_s"] = {"holds": ss, "certificate": cert}
    report["cdrs"] = cdrs
    report["wuu"] = {"holds": wuu, **winfo}
    return report


def cmd_analyze(args):
    scenario, action = _load(args)
    report = _analysis(scenario, action)
    report["scenario"] = args.scenario
    report["command"] = "analyze"
    emit(report, args.json)
    return EXIT_OK


def cmd_quotient(args):
    scenario, action = _load(args)
    cdrs = inf.check_cdrs(action)
    if not cdrs["holds"]:
        emit(
            {
                "command": "quotient",
                "scenario": args.scenario,
                "refused": "the constant-rank condition fails on this chart",
                "hint": "run `uhat blowup` to produce a chart where it holds",
                "cdrs": cdrs,
            },
            args.json,
        )
        return EXIT_REFUSED
    try:
        chain = qt.staged_quotient(action, scenario.options.degree_bound)
    except qt.BoundExhausted as exc:
        emit(
            {
                "command": "quotient",
                "scenario": args.scenario,
                "bound_exhausted": str(exc),
                "bound": exc.bound,
                "condition_ok": exc.condition_ok,
            },
            args.json,
        )
        return EXIT_BOUND
    verification = qt.verify_quotient(chain)
    report = {
        "command": "quotient",
        "scenario": args.scenario,
        "stages": [],
        "affine_dimension": chain.affine_dimension,
        "final_generators": list(chain.final_algebra.ring.names),
        "final_relations": [str(g) for g in chain.final_algebra.relations.generators],
        "verification": verification,
    }
    for stage in chain.stages:
        report["stages"].append(
            {
                "level": stage.level,
                "weight": stage.weight,
                "split": [stage.action_in.lie.basis_names[i] for i in stage.slices.split],
                "slices": [str(f) for f in stage.slices.functions],
                "invariant_generators": {k: str(v) for k, v in stage.inclusion.items()},
                "relations": [str(g) for g in stage.algebra_out.relations.generators],
            }
        )
    emit(report, args.json)
    return EXIT_OK if verification["ok"] else EXIT_REFUSED


def cmd_blowup(args):
    scenario, action = _load(args)
    cdrs = inf.check_cdrs(action)
    if cdrs["holds"]:
        emit(
            {
                "command": "blowup",
                "scenario": args.scenario,
                "refused": "no blow-up needed: the constant-rank condition already holds",
                "hint": "run `uhat quotient` directly",
            },
            args.json,
        )
        return EXIT_REFUSED
    rng = random.Random(scenario.options.seed)
    wuu, winfo = bl.check_wuu(
        action,
        reduced=scenario.options.reduced,
        rng=rng,
        sample_count=scenario.options.sample_count,
    )
    if not wuu:
        emit(
            {
                "command": "blowup",
                "scenario": args.scenario,
                "refused": "the weight-zero stratum misses the minimal-rank locus",
                "wuu": winfo,
            },
            args.json,
        )
        return EXIT_REFUSED
    try:
        cd = bl.centre(action, scenario.options.degree_bound)
        elements = bl.construct_b(action, cd, pbw_bound=scenario.options.pbw_bound)
        chart = bl.build_chart(
            action, cd, elements, j_search_degree=scenario.options.j_search_degree
        )
    except qt.BoundExhausted as exc:
        emit(
            {
                "command": "blowup",
                "scenario": args.scenario,
                "bound_exhausted": str(exc),
                "bound": exc.bound,
            },
            args.json,
        )
        return EXIT_BOUND
    chart_report = bl.verify_chart_cdrs(chart)
    report = {
        "command": "blowup",
        "scenario": args.scenario,
        "k_vector": list(cd.k_vector),
        "witnesses": [
            {
                "level": w.level,
                "weight": w.weight,
                "split": [action.lie.basis_names[i] for i in w.split_rows],
                "functions": [str(f) for f in w.functions],
                "minor": str(w.a),
            }
            for w in cd.witnesses
        ],
        "distinguished_element": str(cd.a),
        "centre_ideal": [str(g) for g in cd.centre_ideal.generators],
        "elements": {
            f"level_{i}": [str(b) for b in bs] for i, bs in sorted(elements.per_level.items())
        },
        "chart_generators": [{"name": n, "numerator": str(g)} for n, g in chart.generators],
        "chart_relations": [str(g) for g in chart.algebra.relations.generators],
        "chart_cdrs": chart_report,
    }
    code = EXIT_OK if chart_report["holds"] and chart_report["certificate_ok"] else EXIT_REFUSED
    if args.with_quotient and code == EXIT_OK:
        chain = qt.staged_quotient(chart.action, scenario.options.degree_bound)
        verification = qt.verify_quotient(chain)
        report["chart_quotient"] = {
            "affine_dimension": chain.affine_dimension,
            "final_generators": list(chain.final_algebra.ring.names),
            "final_relations": [str(g) for g in chain.final_algebra.relations.generators],
            "verification_ok": verification["ok"],
        }
    emit(report, args.json)
    return code


def cmd_identities(args):
    rng = random.Random(args.seed if args.seed is not None else 1)
    report = {"command": "identities", "weighted_bracket": {}, "commutator": {}, "comult": {}}
    ok_all = True
    for n in range(1, args.letters + 1):
        tuples = []
        for _ in range(args.weight_samples):
            tuples.append(tuple(rng.randint(1, 9) for _ in range(n)))
        checked = 0
        failed = []
        for k in _multi_indices(n, args.max_total):
            for w in tuples:
                ok, info = verify_weighted_bracket_identity(n, w, k, args.max_total)
                checked += 1
                if not ok:
                    failed.append({"k": k, "weights": w})
            ok2, info2 = verify_commutator_identity(n, k, args.max_total)
            if not ok2:
                failed.append({"k": k, "identity": "commutator"})
        report["weighted_bracket"][f"letters_{n}"] = {"checked": checked, "failures": failed}
        ok_all = ok_all and not failed
    groups = {
        "additive": GradedLieAlgebra([1], [["e"]]),
        "additive_2": GradedLieAlgebra([1], [["e1", "e2"]]),
        "heisenberg": GradedLieAlgebra(
            [2, 1], [["c"], ["p", "q"]], {("p", "q"): {"c": 1}}
        ),
    }
    for gname, lie in groups.items():
        table = comult_coefficients(lie, args.comult_degree)
        failures = _comult_lemma_failures(table, lie.dim, args.comult_degree)
        report["comult"][gname] = {
            "degree": args.comult_degree,
            "entries": sum(len(v) for v in table.values()),
            "failures": failures,
        }
        ok_all = ok_all and not failures
    report["ok"] = ok_all
    emit(report, args.json)
    return EXIT_OK if ok_all else EXIT_REFUSED


def _multi_indices(n, total):
    import itertools

    out = []
    for k in itertools.product(*(range(total + 1) for _ in range(n))):
        if 0 < sum(k) <= total:
            out.append(k)
    return out


def _comult_lemma_failures(table, n, degree):
    """The degree bound and the single-step coefficient trichotomy."""
    failures = []
    zero = (0,) * n
    for alpha, entry in table.items():
        for (beta, gamma), c in entry.items():
            if c and sum(alpha) > sum(beta) + sum(gamma):
                failures.append({"kind": "degree-bound", "alpha": alpha, "beta": beta, "gamma": gamma})
        # counit: c^alpha_{0,gamma} = delta
        for (beta, gamma), c in entry.items():
            if beta == zero and c != (1 if gamma == alpha else 0):
                failures.append({"kind": "counit", "alpha": alpha, "gamma": gamma, "value": str(c)})
    for alpha, entry in table.items():
        for j in range(n):
            ej = tuple(1 if t == j else 0 for t in range(n))
            for beta in {bg[0] for bg in entry}:
                if sum(alpha) != sum(beta) + 1:
                    continue
                c = entry.get((beta, ej), 0)
                expected_nonzero = alpha == tuple(b + e for b, e in zip(beta, ej))
                if bool(c) != expected_nonzero:
                    failures.append(
                        {"kind": "e_j-trichotomy", "alpha": alpha, "beta": beta, "j": j}
                    )
                if c:
                    kmax = 0
                    while all(
                        (kmax + 1) * e <= b for b, e in zip(beta, ej)
                    ) and any(e for e in ej):
                        kmax += 1
                    if c != 1 + kmax:
                        failures.append(
                            {
                                "kind": "e_j-value",
                                "alpha": alpha,
                                "beta": beta,
                                "j": j,
                                "value": str(c),
                                "expected": 1 + kmax,
                            }
                        )
    return failures


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="uhat",
        description="Symbolic condition checks, quotients and blow-ups for "
        "graded unipotent actions on affine charts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_scenario=True):
        if needs_scenario:
            p.add_argument("--scenario", required=True, help="scenario file path")
        p.add_argument("--degree-bound", type=int, default=None)
        p.add_argument("--pbw-bound", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--json", default=None, help="also write the report as JSON")

    p = sub.add_parser("analyze", help="validate and run every condition check")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("quotient", help="staged invariant-ring quotient")
    common(p)
    p.set_defaults(func=cmd_quotient)

    p = sub.add_parser("blowup", help="construct and verify the blow-up chart")
    common(p)
    p.add_argument(
        "--with-quotient",
        action="store_true",
        help="chain into the staged quotient on the verified chart",
    )
    p.set_defaults(func=cmd_blowup)

    p = sub.add_parser("identities", help="exhaustive free-algebra identity checks")
    common(p, needs_scenario=False)
    p.add_argument("--max-total", type=int, default=4, help="bound on |k|")
    p.add_argument("--letters", type=int, default=3)
    p.add_argument("--weight-samples", type=int, default=5)
    p.add_argument("--comult-degree", type=int, default=4)
    p.set_defaults(func=cmd_identities)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except qt.BoundExhausted as exc:
        print(f"bound exhausted: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except (qt.StageError, bl.NoBlowupNeeded, bl.VerificationFailed) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED


if __name__ == "__main__":
    sys.exit(main())

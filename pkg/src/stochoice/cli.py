"""Command-line interface: axiom checks over menu corpora, utility
fitting, closeness certificates, the probit demonstration, and seeded
corpus generation.

Exit codes are a stable contract for CI use: 0 all requested checks
passed, 1 an axiom or threshold failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import glob
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import axioms
from .corpus import CorpusSpec, generate_corpus, sample_pairs
from .extract import (
    certify_closeness,
    fit_beta_min_delta,
    fit_utility_representation,
    unit_binary_menu,
    upsilon,
)
from .menus import Menu, product
from .rules import (
    IARU,
    GaussianShock,
    GumbelShock,
    OutcomeScaled,
    Rule,
    rule_from_json,
)
from .spaces import SCALAR, VECTOR, Outcome, Space, Utility

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

CHECKABLE_AXIOMS = (
    "neutrality",
    "decomposability",
    "positivity",
    "continuity",
    "identity",
)


class InputError(Exception):
    pass


def _load_json(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc


def _load_rule(path: str) -> Rule:
    try:
        return rule_from_json(_load_json(path))
    except (KeyError, ValueError, TypeError) as exc:
        raise InputError(f"invalid rule file {path}: {exc}") from exc


def _load_menus(args) -> list[tuple[str, Menu]]:
    if getattr(args, "menus", None):
        paths = sorted(glob.glob(args.menus))
        if not paths:
            raise InputError(f"no menu files match {args.menus!r}")
        out = []
        for p in paths:
            try:
                out.append((Path(p).name, Menu.from_json(_load_json(p))))
            except (KeyError, ValueError, TypeError) as exc:
                raise InputError(f"invalid menu file {p}: {exc}") from exc
        return out
    if getattr(args, "corpus", None):
        spec = CorpusSpec.from_json(_load_json(args.corpus))
        menus = generate_corpus(spec)
        return [(f"menu_{i + 1:04d}", m) for i, m in enumerate(menus)]
    raise InputError("one of --menus or --corpus is required")


def _integer_scaled(menu: Menu) -> tuple[Menu, int]:
    """Clear denominators: the menu with outcomes scaled by the lcm k of
    the outcome denominators (k = 1 for integer menus)."""
    fractions = []
    for _, o in menu.entries:
        f = Fraction(o.value).limit_denominator(10**6)
        if abs(o.value - float(f)) > 1e-9:
            raise InputError(
                "identity check requires integer or rational outcomes"
            )
        fractions.append(f)
    k = 1
    for f in fractions:
        k = k * f.denominator // math.gcd(k, f.denominator)
        if k > 10**9:
            raise InputError("outcome denominators too heterogeneous to clear")
    entries = tuple(
        (a, Outcome(menu.space, float(f * k)))
        for (a, _), f in zip(menu.entries, fractions)
    )
    return Menu(menu.space, entries), k


def _extreme_pair(menu: Menu):
    """Highest- and lowest-outcome actions, or None for constant menus."""
    best = max(menu.entries, key=lambda e: e[1].value)
    worst = min(menu.entries, key=lambda e: e[1].value)
    if best[1].value == worst[1].value:
        return None
    return best[0], worst[0]


def _merge_with_witnesses(per_instance):
    merged = axioms.merge_reports(per_instance)
    witnesses = [r.witness for r in per_instance if r.witness is not None]
    return merged, witnesses


def _run_checks(rule, labeled_menus, which, tol, pairs, seed):
    reports = {}
    menus = [m for _, m in labeled_menus]
    if "neutrality" in which:
        reports["neutrality"] = _merge_with_witnesses(
            [
                axioms.neutrality_epsilon(rule, m, tol=tol, menu_id=mid)
                for mid, m in labeled_menus
            ]
        )
    if "positivity" in which:
        reports["positivity"] = _merge_with_witnesses(
            [
                axioms.positivity_check(rule, m, menu_id=mid)
                for mid, m in labeled_menus
            ]
        )
    if "continuity" in which:
        if labeled_menus[0][1].space.kind not in (SCALAR, VECTOR):
            raise InputError("continuity probe unsupported for this space")
        reports["continuity"] = _merge_with_witnesses(
            [
                axioms.continuity_probe(rule, m, menu_id=mid)
                for mid, m in labeled_menus
            ]
        )
    if "decomposability" in which:
        sampled = sample_pairs(menus, pairs, seed)
        reports["decomposability"] = _merge_with_witnesses(
            [
                axioms.decomposability_epsilon(rule, m1, m2, tol=tol)
                for m1, m2 in sampled
            ]
        )
    if "identity" in which:
        if labeled_menus[0][1].space.kind != SCALAR:
            raise InputError("identity check requires scalar menus")
        gaps = []
        witnesses = []
        checked = 0
        for mid, m in labeled_menus:
            pair = _extreme_pair(m)
            if pair is None:
                continue
            scaled, k = _integer_scaled(m)
            probe_rule = rule if k == 1 else OutcomeScaled(rule, 1.0 / k)
            gap = axioms.cross_menu_identity_gap(probe_rule, scaled, *pair)
            checked += 1
            gaps.append(gap)
            if gap > tol:
                witnesses.append(
                    {
                        "menu_id": mid,
                        "pair": [str(pair[0]), str(pair[1])],
                        "k": k,
                        "log_gap": None if math.isinf(gap) else gap,
                    }
                )
        eps = max(gaps) if gaps else 0.0
        merged = axioms.AxiomReport(
            "cross_menu_identity",
            eps <= tol,
            eps,
            witnesses[0] if witnesses else None,
            checked,
        )
        reports["identity"] = (merged, witnesses)
    return reports


def _print_reports(reports, tol, as_json):
    ok = all(r.satisfied_at_tol for r, _ in reports.values())
    if as_json:
        rows = []
        for r, witnesses in reports.values():
            row = r.to_json()
            row["witnesses"] = witnesses
            rows.append(row)
        payload = {"pass": ok, "tol": tol, "reports": rows}
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for name, (r, witnesses) in reports.items():
            label = f"{name} (probe)" if name == "continuity" else name
            eps = "inf" if math.isinf(r.min_epsilon) else f"{r.min_epsilon:.3e}"
            status = "OK" if r.satisfied_at_tol else "FAIL"
            print(
                f"{label:<24} instances={r.instances_checked:<6} "
                f"min_epsilon={eps:<12} {status}"
            )
            # text output stays readable; the JSON report carries them all
            for witness in witnesses[:5]:
                print(f"    witness: {witness}")
            if len(witnesses) > 5:
                print(f"    ... and {len(witnesses) - 5} more")
        print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_check(args) -> int:
    rule = _load_rule(args.rule)
    labeled = _load_menus(args)
    which = (
        list(CHECKABLE_AXIOMS[:4])
        if args.axioms == "all"
        else [a.strip() for a in args.axioms.split(",") if a.strip()]
    )
    unknown = set(which) - set(CHECKABLE_AXIOMS)
    if unknown:
        raise InputError(f"unknown axioms: {sorted(unknown)}")
    pairs = args.pairs if args.pairs is not None else len(labeled)
    if pairs < 1:
        raise InputError("--pairs must be >= 1")
    reports = _run_checks(rule, labeled, which, args.tol, pairs, args.seed)
    return _print_reports(reports, args.tol, args.json)


def cmd_fit(args) -> int:
    rule = _load_rule(args.rule)
    raw = args.space
    if raw.lstrip().startswith("{"):
        space = Space.from_json(json.loads(raw))
    else:
        space = Space.from_json(_load_json(raw))
    result = fit_utility_representation(rule, space)
    if args.json:
        print(
            json.dumps(
                {
                    "utility": result.utility.to_json(),
                    "probe_condition": result.probe_condition,
                },
                indent=2,
                sort_keys=True,
            )
        )
    else:
        print(f"space: {space.kind}")
        for key, value in result.utility.to_json().items():
            if key != "space":
                print(f"{key}: {value}")
        print(f"probe condition number: {result.probe_condition:.6g}")
    return EXIT_OK


def cmd_certify(args) -> int:
    rule = _load_rule(args.rule)
    labeled = _load_menus(args)
    ids = [mid for mid, _ in labeled]
    menus = [m for _, m in labeled]
    space = menus[0].space
    if args.utility == "auto":
        if space.kind == SCALAR:
            beta = fit_beta_min_delta(rule, menus)
            utility = Utility.scalar_beta(beta)
        else:
            utility = fit_utility_representation(rule, space).utility
    else:
        utility = Utility.from_json(_load_json(args.utility))
    cert = certify_closeness(rule, menus, utility, menu_ids=ids)
    payload = json.dumps(cert.to_json(), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
        print(f"delta = {cert.delta:.6g} over {cert.corpus_size} menus -> {args.out}")
    else:
        print(payload)
    return EXIT_OK


def _parse_shock(text: str):
    kind, _, param = text.partition(":")
    value = float(param) if param else 1.0
    if kind == "gaussian":
        return GaussianShock(value)
    if kind == "gumbel":
        return GumbelShock(value)
    raise InputError(f"unknown shock spec {text!r} (use gaussian:SIGMA or gumbel:BETA)")


def cmd_demo_probit(args) -> int:
    """The decomposability counterexample: a random-utility rule with
    Gaussian shocks overweights the top action on the squared menu."""
    shock = _parse_shock(args.shock)
    rule = IARU(shock)
    unit = unit_binary_menu()
    square = product(unit, unit)
    p_top = rule.choose(unit)["b1"]
    p_diag = rule.choose(square)[("b1", "b1")]
    margin = p_diag - p_top**2
    if args.json:
        print(
            json.dumps(
                {
                    "binary_top": p_top,
                    "square_diagonal": p_diag,
                    "independent_product": p_top**2,
                    "violation_margin": margin,
                },
                indent=2,
                sort_keys=True,
            )
        )
    else:
        print(f"binary menu, P(top)            = {p_top:.6f}")
        print(f"squared menu, P(top, top)      = {p_diag:.6f}")
        print(f"independent product P(top)^2   = {p_top ** 2:.6f}")
        print(f"decomposability margin         = {margin:+.6f}")
    return EXIT_OK


def cmd_gen(args) -> int:
    spec = CorpusSpec.from_json(_load_json(args.spec))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    menus = generate_corpus(spec)
    for i, menu in enumerate(menus):
        path = out_dir / f"menu_{i + 1:04d}.json"
        path.write_text(
            json.dumps(menu.to_json(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
    print(f"wrote {len(menus)} menus to {out_dir}")
    return EXIT_OK


def cmd_upsilon(args) -> int:
    rule = _load_rule(args.rule)
    labeled = _load_menus(args)
    rows = []
    for mid, menu in labeled:
        est = upsilon(rule, menu, args.n_max, eps_decomp=args.eps_decomp)
        rows.append(
            {
                "menu_id": mid,
                "n_used": est.n_used,
                "bound": est.bound,
                "distribution": est.distribution.to_json(),
            }
        )
    if args.json:
        print(json.dumps(rows, indent=2, sort_keys=True))
    else:
        for row in rows:
            print(f"{row['menu_id']} (n={row['n_used']}, bound={row['bound']}):")
            for a, p in row["distribution"].items():
                print(f"    {a}: {p:.10f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stochoice",
        description="Axiom checks and logit extraction for stochastic choice rules",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_inputs(p, menus=True):
        p.add_argument("--rule", required=True, help="rule JSON file")
        if menus:
            p.add_argument("--menus", help="glob of menu JSON files")
            p.add_argument("--corpus", help="corpus spec JSON file")
        p.add_argument("--json", action="store_true", help="machine-readable output")

    pilot = sub.add_parser("check", help="run axiom checks over a corpus")
    add_inputs(pilot)
    pilot.add_argument("--axioms", default="all", help="comma list or 'all'")
    pilot.add_argument("--tol", type=float, default=1e-9)
    pilot.add_argument("--pairs", type=int, default=None, help="menu pairs for decomposability")
    pilot.add_argument("--seed", type=int, default=0, help="pair sampling seed")
    pilot.set_defaults(func=cmd_check)

    pfit = sub.add_parser("fit", help="fit a utility representation")
    pfit.add_argument("--rule", required=True)
    pfit.add_argument("--space", required=True, help="space JSON (inline or file)")
    pfit.add_argument("--json", action="store_true")
    pfit.set_defaults(func=cmd_fit)

    pcert = sub.add_parser("certify", help="certify closeness to a logit")
    add_inputs(pcert)
    pcert.add_argument("--utility", default="auto", help="utility JSON file or 'auto'")
    pcert.add_argument("--out", help="certificate output file")
    pcert.set_defaults(func=cmd_certify)

    pdemo = sub.add_parser("demo-probit", help="decomposability counterexample")
    pdemo.add_argument("--shock", default="gaussian:1")
    pdemo.add_argument("--json", action="store_true")
    pdemo.set_defaults(func=cmd_demo_probit)

    pgen = sub.add_parser("gen", help="generate a seeded menu corpus")
    pgen.add_argument("--spec", required=True, help="corpus spec JSON file")
    pgen.add_argument("--out", required=True, help="output directory")
    pgen.set_defaults(func=cmd_gen)

    pups = sub.add_parser("upsilon", help="evaluate the nth-root limit rule")
    add_inputs(pups)
    pups.add_argument("--n-max", type=int, default=12, dest="n_max")
    pups.add_argument("--eps-decomp", type=float, default=None, dest="eps_decomp")
    pups.set_defaults(func=cmd_upsilon)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

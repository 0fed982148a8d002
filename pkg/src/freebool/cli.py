"""``freebool`` command line: JSON experiment configs in, JSON reports out.

Exit status: 0 success, 2 invalid input or usage, 3 bounded search
exhausted (or undecidable from the finite description), 4 verification
counterexample.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from typing import Any, Callable

from freebool import flags, graev, mathias, omega
from freebool.errors import SearchExhausted, Undecided, ValidationError, VerificationFailure
from freebool.words import Word, format_bits, parse_bits

SCHEMA = "bft/1"
EXIT_OK, EXIT_INVALID, EXIT_EXHAUSTED, EXIT_COUNTEREXAMPLE = 0, 2, 3, 4

ANCHORS = {
    "norm": "Graev extension of a pseudometric: minimum-weight pairing of letters",
    "dist": "invariant distance induced by the Graev seminorm",
    "majorize": "dyadic non-Archimedean majorant from threshold-graph components",
    "nbhd": "unit ball of a Graev seminorm or sum of cover subgroups",
    "linear-subgroup": "subgroup generated by a disjoint cover: even letters per block",
    "filter-check": "filter membership on eventually periodic sets",
    "diag": "greedy diagonal intersection",
    "selective": "selector and transversal witnesses in a filter",
    "pseudo": "pseudointersection of a countable family inside a filter",
    "mathias": "Mathias conditions and basic neighborhoods",
    "laver": "Laver neighborhoods and Laver trees",
    "laver-refine": "diagonal refinement of a Laver neighborhood to a Mathias neighborhood",
    "probe-closure": "closure of a union of Mathias neighborhoods",
    "witness": "small-weight word built from the differences of a decreasing schema",
    "flag-basis": "basis adapted to a flag of subspaces by sifting",
    "greedy-basis": "minimum-norm greedy basis",
    "verify-bounds": "letter and separation bounds for greedy bases",
}


class Fail(Exception):
    """Carries a partial report and an exit status."""

    def __init__(self, status: int, message: str, payload: dict | None = None):
        super().__init__(message)
        self.status, self.payload = status, payload or {}


# -- input helpers -------------------------------------------------------------


class Inputs:
    def __init__(self, doc: dict, bounds: dict, seed: int | None):
        self.doc, self.bounds, self.seed = doc, bounds, seed

    def get(self, key: str, default: Any = ..., path: str = "inputs") -> Any:
        if key in self.doc:
            return self.doc[key]
        if key in self.bounds:
            return self.bounds[key]
        if default is ...:
            raise ValidationError(f"{path}.{key}: required field missing")
        return default

    def nat(self, key: str, default: Any = ...) -> int:
        v = self.get(key, default)
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise ValidationError(f"inputs.{key}: expected a natural number, got {v!r}")
        return v


def q(x: Fraction) -> str:
    return graev.format_fraction(Fraction(x))


def parse_space(doc: Any, path: str = "inputs.space") -> graev.PseudometricSpace:
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: expected an object")
    entries: dict[tuple[str, str], Fraction] = {}
    for k, row in enumerate(doc.get("dist", [])):
        if not (isinstance(row, list) and len(row) == 3):
            raise ValidationError(f"{path}.dist[{k}]: expected [a, b, \"p/q\"]")
        try:
            entries[(str(row[0]), str(row[1]))] = graev.as_fraction(row[2])
        except ValidationError as exc:
            raise ValidationError(f"{path}.dist[{k}]: {exc}") from None
    flavor = doc.get("flavor", graev.GRAEV)
    basepoint = doc.get("basepoint", "*" if flavor == graev.GRAEV else None)
    return graev.PseudometricSpace([str(p) for p in doc.get("points", [])], entries, basepoint, flavor)


def space_doc(space: graev.PseudometricSpace) -> list[list[str]]:
    names, t = space.node_names, space.table()
    return [[names[i], names[j], q(t[i][j])] for i in range(len(names)) for j in range(i + 1, len(names))]


def parse_word_names(space: graev.PseudometricSpace, names: Any, path: str) -> Word:
    if not isinstance(names, list):
        raise ValidationError(f"{path}: expected a list of point names")
    return space.word(str(n) for n in names)


def parse_nat_word(value: Any, path: str) -> Word:
    if not isinstance(value, list) or any(not isinstance(x, int) or x < 0 for x in value):
        raise ValidationError(f"{path}: expected a list of naturals")
    return Word.of(value)


def parse_filter(doc: Any) -> omega.RepFilter:
    if doc in (None, "frechet"):
        return omega.RepFilter.frechet()
    if isinstance(doc, str):
        return omega.RepFilter.generated_by(doc)
    if isinstance(doc, dict):
        gens = doc.get("generators", [])
        schema = doc.get("schema")
        return omega.RepFilter(
            tuple(omega.parse_repset(g) for g in gens),
            omega.parse_family(schema) if schema is not None else None,
        )
    raise ValidationError(f"inputs.filter: cannot parse {doc!r}")


def parse_nbhd(doc: Any) -> mathias.LaverNbhd:
    if not isinstance(doc, dict):
        raise ValidationError("inputs.nbhd: expected an object")
    table = {}
    for k, row in enumerate(doc.get("table", [])):
        if not isinstance(row, dict) or "s" not in row or "A" not in row:
            raise ValidationError(f"inputs.nbhd.table[{k}]: expected {{\"s\": [...], \"A\": set}}")
        table[parse_nat_word(row["s"], f"inputs.nbhd.table[{k}].s")] = omega.parse_repset(row["A"])
    default = doc.get("default")
    return mathias.LaverNbhd(
        table,
        omega.parse_family(default) if default is not None else None,
        shift=int(doc.get("shift", 0)),
    )


def parse_norm(doc: Any, dim: int, seed: int | None) -> flags.NormOracle:
    if isinstance(doc, dict) and "random" in doc:
        rng = random.Random(seed if seed is not None else 0)
        return flags.random_norm(rng, dim)
    if isinstance(doc, dict) and "generators" in doc:
        gens = [(parse_bits(g)[0], graev.as_fraction(w)) for g, w in doc["generators"]]
        return flags.cayley_norm(dim, gens)
    if isinstance(doc, dict):
        values = {parse_bits(k)[0]: graev.as_fraction(v) for k, v in doc.items()}
        values.setdefault(0, Fraction(0))
        return flags.NormOracle(dim, values)
    raise ValidationError("inputs.norm: expected a table, {\"generators\": ...} or {\"random\": {}}")


def bits_list(values: Any, dim: int | None, path: str) -> tuple[list[int], int]:
    if not isinstance(values, list):
        raise ValidationError(f"{path}: expected a list of bit strings")
    out = []
    for k, s in enumerate(values):
        if not isinstance(s, str):
            raise ValidationError(f"{path}[{k}]: expected a bit string")
        v, d = parse_bits(s)
        if dim is None:
            dim = d
        elif d != dim:
            raise ValidationError(f"{path}[{k}]: length {d} differs from dimension {dim}")
        out.append(v)
    return out, dim or 0


def repset_doc(A: omega.RepSet) -> str:
    return str(A)


# -- commands ------------------------------------------------------------------


def cmd_norm(inp: Inputs) -> dict:
    space = parse_space(inp.get("space", {"points": [], "flavor": graev.GRAEV}))
    g = parse_word_names(space, inp.get("word"), "inputs.word")
    value = graev.graev_norm(g, space)
    names = space.node_names + (["0"] if space.flavor == graev.MARKOV else [])
    pairs = [[names[i], names[j]] for i, j in graev.graev_pairing(g, space)] if g else []
    return {"norm": q(value), "pairing": pairs}


def cmd_dist(inp: Inputs) -> dict:
    space = parse_space(inp.get("space"))
    g = parse_word_names(space, inp.get("g"), "inputs.g")
    h = parse_word_names(space, inp.get("h"), "inputs.h")
    return {"dist": q(graev.graev_dist(g, h, space))}


def cmd_majorize(inp: Inputs) -> dict:
    space = parse_space(inp.get("space"))
    if inp.get("normalize", False):
        space = space.normalized()
    rho = graev.nonarch_majorant(space)
    t = rho.table()
    n = len(rho.node_names)
    return {
        "majorant": space_doc(rho),
        "dyadic": all(graev.is_dyadic(t[i][j]) for i in range(n) for j in range(n)),
    }


def cmd_nbhd(inp: Inputs) -> dict:
    if "covers" in inp.doc:
        points = [str(p) for p in inp.get("points")]
        reg = {p: i for i, p in enumerate(points)}

        def ids(block, path):
            try:
                return [reg[str(x)] for x in block]
            except KeyError as exc:
                raise ValidationError(f"{path}: unknown point {exc.args[0]!r}") from None

        covers = [
            graev.DisjointCover.of(ids(b, f"inputs.covers[{c}][{k}]") for k, b in enumerate(cover))
            for c, cover in enumerate(inp.get("covers"))
        ]
        g = Word.of(ids(inp.get("word"), "inputs.word"))
        base = inp.get("basepoint", None)
        res = graev.in_U_Gamma(g, covers, inp.nat("cancel_depth", 2), reg[base] if base is not None else None)
        pairs = [[slot, points[x], points[y] if y is not None else base] for slot, x, y in res.pairs]
        return {
            "member": res.verdict.value,
            "pairs": pairs,
            "cancelled": [points[z] for z in res.cancelled],
            "note": res.note,
        }
    space = parse_space(inp.get("space"))
    g = parse_word_names(space, inp.get("word"), "inputs.word")
    value = graev.graev_norm(g, space)
    return {"member": "yes" if value < 1 else "no", "norm": q(value)}


def cmd_linear_subgroup(inp: Inputs) -> dict:
    points = [str(p) for p in inp.get("points")]
    reg = {p: i for i, p in enumerate(points)}
    try:
        cover = graev.DisjointCover.of([reg[str(x)] for x in b] for b in inp.get("cover"))
        g = Word.of(reg[str(x)] for x in inp.get("word"))
    except KeyError as exc:
        raise ValidationError(f"inputs: unknown point {exc.args[0]!r}") from None
    sig = graev.coset_signature(g, cover)
    return {
        "member": graev.in_linear_subgroup(g, cover),
        "signature": format_bits(sig, len(cover.blocks)),
        "cosets": 2 ** len(cover.blocks),
    }


def cmd_filter_check(inp: Inputs) -> dict:
    F = parse_filter(inp.get("filter", None))
    A = omega.parse_repset(inp.get("set"))
    ans = omega.filter_contains(F, A, inp.nat("depth", 8))
    return {"verdict": ans.verdict.value, "depth": ans.depth, "note": ans.note}


def cmd_diag(inp: Inputs) -> dict:
    family = omega.parse_family(inp.get("family"))
    within = inp.get("within", None)
    D = omega.diagonal_intersection(
        family,
        inp.nat("count"),
        start=inp.get("start", 0),
        within=omega.parse_repset(within) if within is not None else None,
        search_bound=inp.nat("bound", 1 << 20),
    )
    return {"D": D}


def cmd_greedy_function(inp: Inputs) -> dict:
    family = omega.parse_family(inp.get("family"))
    res = omega.greedy_function(family, inp.nat("length"), search_bound=inp.nat("bound", 1 << 20))
    return {"f": res.values, "range": sorted(res.range)}


def cmd_selective(inp: Inputs) -> dict:
    F = parse_filter(inp.get("filter", None))
    family = omega.parse_family(inp.get("family"))
    res = omega.selective_witness(F, family, inp.get("mode"), inp.nat("bound", 64), inp.nat("depth", 4))
    return {
        "found": res.found,
        "witness": repset_doc(res.witness) if res.witness is not None else None,
        "sequence": res.sequence,
        "bound": res.bound,
        "note": res.note,
    }


def cmd_pseudo(inp: Inputs) -> dict:
    F = parse_filter(inp.get("filter", None))
    family = omega.parse_family(inp.get("family"))
    res = omega.pseudointersection_check(F, family, inp.nat("depth", 6))
    return {
        "verdict": res.verdict,
        "witness": repset_doc(res.witness) if res.witness is not None else None,
        "certified": res.certified,
        "failures": {str(k): v for k, v in sorted(res.failures.items())},
        "note": res.note,
    }


def _condition(doc: Any, path: str) -> mathias.MathiasCondition:
    if not isinstance(doc, dict) or "s" not in doc or "A" not in doc:
        raise ValidationError(f"{path}: expected {{\"s\": [...], \"A\": set}}")
    return mathias.MathiasCondition(parse_nat_word(doc["s"], f"{path}.s"), omega.parse_repset(doc["A"]))


def cmd_mathias(inp: Inputs) -> dict:
    if "c1" in inp.doc:
        c1, c2 = _condition(inp.get("c1"), "inputs.c1"), _condition(inp.get("c2"), "inputs.c2")
        return {"leq": mathias.mathias_leq(c1, c2)}
    t = parse_nat_word(inp.get("t"), "inputs.t")
    s = parse_nat_word(inp.get("s"), "inputs.s")
    return {"member": mathias.in_basic_open(t, s, omega.parse_repset(inp.get("A")))}


def cmd_laver(inp: Inputs) -> dict:
    out: dict[str, Any] = {}
    if "tree" in inp.doc:
        doc = inp.get("tree")
        nodes = frozenset(tuple(n) for n in doc.get("nodes", []))
        succ = {tuple(row["node"]): omega.parse_repset(row["succ"]) for row in doc.get("succ", [])}
        tree = mathias.LaverTreeApprox(nodes, tuple(doc.get("stem", [])), succ)
        res = mathias.laver_tree_check(tree, parse_filter(inp.get("filter", None)), inp.nat("depth", 8))
        out["tree"] = {"ok": res.ok, "node": list(res.node) if res.node is not None else None, "reason": res.reason}
    if "words" in inp.doc:
        U = parse_nbhd(inp.get("nbhd"))
        out["members"] = [
            [list(w.support), mathias.in_laver_nbhd(w, U)]
            for w in (parse_nat_word(x, f"inputs.words[{k}]") for k, x in enumerate(inp.get("words")))
        ]
    if not out:
        raise ValidationError("inputs: expected 'words' (with 'nbhd') or 'tree'")
    return out


def cmd_laver_refine(inp: Inputs) -> dict:
    U = parse_nbhd(inp.get("nbhd"))
    F = parse_filter(inp.get("filter", None))
    res = mathias.laver_to_mathias(U, F, inp.nat("check_max"), inp.nat("check_len"), depth=inp.nat("depth", 8))
    payload = {
        "D": res.D,
        "passed": res.passed,
        "checked": res.checked,
        "counterexample": list(res.counterexample.support) if res.counterexample is not None else None,
        "note": res.note,
    }
    if not res.passed:
        raise Fail(EXIT_COUNTEREXAMPLE, f"counterexample {res.counterexample}", payload)
    return payload


def cmd_probe_closure(inp: Inputs) -> dict:
    family = omega.parse_family(inp.get("family"))
    F = parse_filter(inp.get("filter", None))
    rep = mathias.closure_probe(family, F, inp.nat("max_elt"), inp.nat("max_len"), inp.nat("depth", 4))
    return {
        "in_U": len(rep.in_U),
        "in_U_prime_only": [list(w.support) for w in rep.in_U_prime],
        "exterior": [[list(t.support), repset_doc(A)] for t, A in rep.exterior],
        "separators_verified": rep.separators_verified,
        "limit_witnesses": [list(w) if w is not None else None for w in rep.limit_witnesses],
        "empty_is_limit": rep.empty_is_limit,
    }


def cmd_witness(inp: Inputs) -> dict:
    schema = omega.parse_family(inp.get("schema"))
    rdoc = inp.get("r", {})
    r = graev.LetterNorm.reciprocal(graev.as_fraction(rdoc.get("scale", 1)), int(rdoc.get("shift", 0)))
    w = mathias.witness_in_Ud(schema, r, inp.nat("n"), budget=inp.nat("bound", 1 << 16))
    return {
        "word": list(w.word.support),
        "n": w.n,
        "m": w.m,
        "rows": w.rows,
        "columns": w.columns,
        "weight": q(w.total),
        "verified": mathias.verify_Ud_witness(w, r),
    }


def cmd_flag_basis(inp: Inputs) -> dict:
    chain_doc = inp.get("chain")
    if not isinstance(chain_doc, list):
        raise ValidationError("inputs.chain: expected a list of levels")
    dim = inp.get("dim", None)
    chain = []
    for k, level in enumerate(chain_doc):
        vecs, d = bits_list(level, dim, f"inputs.chain[{k}]")
        dim = dim if dim is not None else (d if level else None)
        chain.append(vecs)
    basis, dim = bits_list(inp.get("basis"), dim, "inputs.basis")
    flag = flags.Flag(dim, chain)
    res = flags.flag_adapted_basis(flag, basis)
    report = flags.check_adapted(flag, basis, res)
    if not report.ok:
        raise Fail(EXIT_COUNTEREXAMPLE, "; ".join(report.failures))
    return {
        "basis": [format_bits(v, dim) for v in res.vectors],
        "slots": res.slots,
        "levels": res.levels,
        "refined": [format_bits(v, dim) for v in res.refined],
        "certified": True,
    }


def _greedy(inp: Inputs) -> tuple[flags.NormOracle, list[int], flags.GreedyBasis, int]:
    basis, dim = bits_list(inp.get("basis"), inp.get("dim", None), "inputs.basis")
    norm = parse_norm(inp.get("norm"), dim, inp.seed)
    return norm, basis, flags.norm_greedy_basis(norm, basis), dim


def cmd_greedy_basis(inp: Inputs) -> dict:
    norm, basis, res, dim = _greedy(inp)
    return {
        "basis": [format_bits(v, dim) for v in res.vectors],
        "letters": [list(x) for x in res.letters],
        "norms": [q(norm(v)) for v in res.vectors],
    }


def cmd_verify_bounds(inp: Inputs) -> dict:
    norm, basis, res, dim = _greedy(inp)
    lengths = [inp.nat("n")] if "n" in inp.doc else list(range(dim + 1))
    reports = []
    for n in lengths:
        rep = flags.verify_greedy_bounds(res.vectors, norm, n)
        reports.append({
            "n": n,
            "words": rep.words,
            "letter_ratio": q(rep.letter_ratio) if rep.letter_ratio is not None else None,
            "separation_ratio": q(rep.separation_ratio) if rep.separation_ratio is not None else None,
            "closedness_ratio": q(rep.closedness_ratio) if rep.closedness_ratio is not None else None,
            "ok": rep.ok,
        })
    return {"basis": [format_bits(v, dim) for v in res.vectors], "reports": reports}


COMMANDS: dict[str, Callable[[Inputs], dict]] = {
    "norm": cmd_norm,
    "dist": cmd_dist,
    "majorize": cmd_majorize,
    "nbhd": cmd_nbhd,
    "linear-subgroup": cmd_linear_subgroup,
    "filter-check": cmd_filter_check,
    "diag": cmd_diag,
    "selective": cmd_selective,
    "pseudo": cmd_pseudo,
    "mathias": cmd_mathias,
    "laver": cmd_laver,
    "laver-refine": cmd_laver_refine,
    "probe-closure": cmd_probe_closure,
    "witness": cmd_witness,
    "flag-basis": cmd_flag_basis,
    "greedy-basis": cmd_greedy_basis,
    "verify-bounds": cmd_verify_bounds,
}
EXTRA_COMMANDS = {"greedy-function": cmd_greedy_function}
ANCHORS["greedy-function"] = "greedy function through an indexed family"


def run(config: Any, *, bound: int | None = None, seed: int | None = None) -> tuple[dict, int]:
    """Execute one config; return ``(report, exit_status)``."""
    report: dict[str, Any] = {"schema": SCHEMA, "config": config}
    try:
        if not isinstance(config, dict):
            raise ValidationError("config: expected a JSON object")
        schema = config.get("schema", SCHEMA)
        if schema != SCHEMA:
            raise ValidationError(f"config.schema: unsupported version {schema!r}")
        command = config.get("command")
        handler = COMMANDS.get(command) or EXTRA_COMMANDS.get(command)
        if handler is None:
            raise ValidationError(f"config.command: unknown command {command!r}; choose from {', '.join(COMMANDS)}")
        report["command"] = command
        report["anchor"] = ANCHORS[command]
        bounds = dict(config.get("bounds", {}))
        if bound is not None:
            bounds["bound"] = bound
        for k, v in bounds.items():
            if not isinstance(v, int) or v <= 0:
                raise ValidationError(f"config.bounds.{k}: bounds must be positive integers")
        seed = seed if seed is not None else config.get("seed")
        doc = config.get("inputs")
        if doc is None:
            doc = {k: v for k, v in config.items() if k not in {"schema", "command", "bounds", "seed"}}
        if not isinstance(doc, dict):
            raise ValidationError("config.inputs: expected an object")
        report.update(handler(Inputs(doc, bounds, seed)))
        report["status"] = "ok"
        return report, EXIT_OK
    except Fail as exc:
        report.update(exc.payload)
        report.update(status="counterexample" if exc.status == EXIT_COUNTEREXAMPLE else "error", error=str(exc))
        return report, exc.status
    except VerificationFailure as exc:
        report.update(status="counterexample", error=str(exc), counterexample=_plain(exc.counterexample))
        return report, EXIT_COUNTEREXAMPLE
    except (SearchExhausted, Undecided) as exc:
        report.update(status="exhausted", error=str(exc), bound=getattr(exc, "bound", None))
        return report, EXIT_EXHAUSTED
    except ValidationError as exc:
        report.update(status="invalid", error=str(exc))
        return report, EXIT_INVALID


def _plain(x: Any) -> Any:
    if isinstance(x, Word):
        return list(x.support)
    if isinstance(x, Fraction):
        return q(x)
    if isinstance(x, (list, tuple)):
        return [_plain(y) for y in x]
    return x


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=_plain) + "\n"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="freebool",
        description="Run a JSON experiment config (schema bft/1) and emit a JSON report.",
        epilog="commands: " + ", ".join(COMMANDS),
    )
    p.add_argument("--config", required=True, help="path to the JSON config ('-' for stdin)")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--bound", type=int, help="override the search/verification bound")
    p.add_argument("--seed", type=int, help="seed for randomized inputs")
    p.add_argument("--quiet", action="store_true", help="suppress diagnostics on stderr")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    if args.bound is not None and args.bound <= 0:
        parser.print_usage(sys.stderr)
        print("freebool: --bound must be positive", file=sys.stderr)
        return EXIT_INVALID
    try:
        text = sys.stdin.read() if args.config == "-" else open(args.config, encoding="utf-8").read()
    except OSError as exc:
        print(f"freebool: cannot read config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        print(f"freebool: {args.config}:{exc.lineno}:{exc.colno}: {exc.msg}", file=sys.stderr)
        return EXIT_INVALID
    report, status = run(config, bound=args.bound, seed=args.seed)
    out = dumps(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    if status and not args.quiet:
        print(f"freebool: {report.get('status')}: {report.get('error')}", file=sys.stderr)
    if status == EXIT_INVALID and report.get("command") is None and not args.quiet:
        parser.print_usage(sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface: load instance files, run analyses, emit JSON reports.

Reports go to stdout as deterministic JSON (sorted keys, sorted
set-valued fields); a one-line human summary goes to stderr.  Exit
codes: 0 on success, 1 on a domain failure (with a witness in the
report), 2 on unusable input.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from math import log

from . import chains as chains_mod
from . import moves as moves_mod
from .decomposition import (
    NotIrreducibleError,
    VerificationFailedError,
    block_width_bound,
    decompose,
)
from .qgshift import (
    IncompatibleOperationError,
    QuasigroupShift,
    Section,
    UnequalCardinalitiesError,
    build,
    induced_partitions,
)
from .quasigroup import (
    LatinSquareError,
    PartitionError,
    validate_latin_square,
)
from .shifts import (
    EmptyShiftError,
    SftPresentation,
    entropy,
    is_irreducible,
    pruned_markov_shift,
    to_markov,
    uniform_follower_count,
)

_SYMBOL_RE = re.compile(r"^[A-Za-z0-9_.+^-]+$")


class ParseError(ValueError):
    pass


class DomainFailure(ValueError):
    def __init__(self, check: str, witness):
        self.check = check
        self.witness = witness
        super().__init__(f"{check}: {witness}")


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ParseError(message)


def load_instance(path: str) -> tuple[QuasigroupShift, dict]:
    """Parse an instance file into a validated pair, plus loading notes.

    The file is JSON with fields ``alphabet`` (list of symbol strings),
    ``op_table`` (square array of symbols, row ``i`` column ``j`` holding
    ``alphabet[i] * alphabet[j]``), exactly one of ``transitions`` (0/1
    matrix indexed like the given alphabet) or ``forbidden_words`` (lists
    of symbols, each of length at least two), and optional ``base`` and
    ``section``.  Equivalent presentations normalize to one canonical
    instance, so reports do not depend on the ordering in the file.
    """
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON in {path}: {exc}") from None
    _require(isinstance(data, dict), "instance must be a JSON object")
    alphabet = data.get("alphabet")
    _require(
        isinstance(alphabet, list) and alphabet and all(isinstance(s, str) for s in alphabet),
        "alphabet must be a non-empty list of strings",
    )
    for s in alphabet:
        _require(bool(_SYMBOL_RE.match(s)), f"symbol {s!r} contains reserved characters")
    op_table = data.get("op_table")
    _require(
        isinstance(op_table, list)
        and len(op_table) == len(alphabet)
        and all(isinstance(r, list) and len(r) == len(alphabet) for r in op_table),
        "op_table must be a square array over the alphabet",
    )
    has_trans = "transitions" in data
    has_forbidden = "forbidden_words" in data
    _require(
        has_trans != has_forbidden,
        "exactly one of transitions / forbidden_words is required",
    )
    notes: dict = {"pruned_symbols": []}

    op = validate_latin_square(op_table, alphabet)

    if has_trans:
        trans = data["transitions"]
        _require(
            isinstance(trans, list)
            and len(trans) == len(alphabet)
            and all(
                isinstance(r, list) and len(r) == len(alphabet) and all(x in (0, 1) for x in r)
                for r in trans
            ),
            "transitions must be a 0/1 matrix over the alphabet",
        )
        shift, pruned = pruned_markov_shift(alphabet, trans)
        notes["pruned_symbols"] = list(pruned)
        if pruned:
            keep = [s for s in op.symbols if s in shift.symbols]
            table = [[op.mul(a, b) for b in keep] for a in keep]
            op = validate_latin_square(table, keep)
        base = data.get("base")
        if base is not None:
            _require(isinstance(base, str), "base must be a symbol string")
            _require(base in shift.symbols, f"base {base!r} not in the (pruned) alphabet")
    else:
        forbidden = data["forbidden_words"]
        _require(
            isinstance(forbidden, list)
            and all(isinstance(w, list) and all(isinstance(s, str) for s in w) for w in forbidden),
            "forbidden_words must be a list of symbol lists",
        )
        shift, op, base, lifted = _lift_sft_instance(alphabet, op, forbidden, data.get("base"))
        notes.update(lifted)

    sec = data.get("section")
    if sec is not None:
        _require(
            isinstance(sec, dict)
            and all(isinstance(k, str) and isinstance(v, str) for k, v in sec.items()),
            "section must map member symbols to representatives",
        )
        notes["section"] = dict(sorted(sec.items()))

    qs = build(shift, op, base)
    return qs, notes


def _lift_sft_instance(alphabet, op, forbidden, base):
    """Normalize a forbidden-word instance to a Markov pair.

    The operation lifts componentwise to the block alphabet; a product of
    two allowed words that is itself forbidden is a domain failure and
    reported with the witness pair.
    """
    try:
        sft = SftPresentation(tuple(sorted(alphabet)), tuple(tuple(w) for w in forbidden))
    except EmptyShiftError:
        raise
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    norm = to_markov(sft)
    k = norm.forward.width
    word_of = {name: w for w, name in norm.forward.rule.items()}
    name_of = dict(norm.forward.rule)
    table = []
    for u_name in norm.shift.symbols:
        row = []
        for v_name in norm.shift.symbols:
            prod = tuple(op.mul(a, b) for a, b in zip(word_of[u_name], word_of[v_name]))
            if prod not in name_of:
                raise DomainFailure(
                    "incompatible_operation",
                    {
                        "word": list(word_of[u_name]),
                        "word2": list(word_of[v_name]),
                        "product": list(prod),
                        "reason": "product of allowed words is forbidden",
                    },
                )
            row.append(name_of[prod])
        table.append(row)
    lifted_op = validate_latin_square(table, list(norm.shift.symbols))
    lifted_base = None
    if base is not None:
        candidates = [n for n in norm.shift.symbols if word_of[n][0] == base]
        if not candidates:
            raise ParseError(f"base {base!r} does not start any allowed block symbol")
        lifted_base = candidates[0]
    notes = {
        "normalized_block_length": k,
        "pruned_symbols": list(norm.pruned),
        "block_symbols": {n: list(word_of[n]) for n in norm.shift.symbols},
    }
    return norm.shift, lifted_op, lifted_base, notes


def _emit(report: dict, summary: str) -> None:
    print(json.dumps(report, sort_keys=True, indent=2))
    print(summary, file=sys.stderr)


def _partition_blocks(p) -> list[list[str]]:
    return [list(b) for b in p.blocks]


def cmd_validate(args) -> int:
    checks: list[dict] = []
    report = {"command": "validate", "checks": checks}

    def record(name: str, status: str, witness=None):
        entry = {"name": name, "status": status}
        if witness is not None:
            entry["witness"] = witness
        checks.append(entry)

    try:
        qs, notes = load_instance(args.instance)
    except (LatinSquareError, EmptyShiftError) as exc:
        record("latin_square_and_presentation", "fail", str(exc))
        report["status"] = "fail"
        _emit(report, f"FAIL: {exc}")
        return 1
    except IncompatibleOperationError as exc:
        record("operation_compatibility", "fail", list(exc.witness))
        report["status"] = "fail"
        _emit(report, f"FAIL: {exc}")
        return 1
    except (UnequalCardinalitiesError, DomainFailure) as exc:
        record("operation_compatibility", "fail", getattr(exc, "witness", str(exc)))
        report["status"] = "fail"
        _emit(report, f"FAIL: {exc}")
        return 1
    record("latin_square", "pass")
    record("operation_compatibility", "pass")
    record("uniform_set_sizes", "pass")
    report["alphabet"] = list(qs.symbols)
    report["pruned_symbols"] = notes.get("pruned_symbols", [])
    try:
        parts = induced_partitions(qs)
    except AssertionError as exc:  # structural theorems; should not fire
        record("induced_partitions", "fail", str(exc))
        report["status"] = "fail"
        _emit(report, f"FAIL: {exc}")
        return 1
    record("induced_partitions", "pass")
    report["cell_size"] = parts.cell_size
    report["status"] = "pass"
    _emit(report, f"ok: {len(checks)} checks passed")
    return 0


def cmd_analyze(args) -> int:
    qs, notes = load_instance(args.instance)
    parts = induced_partitions(qs)
    corr = {
        parts.follower_classes.block_name(i): parts.predecessor_classes.block_name(j)
        for i, j in enumerate(parts.correspondence)
    }
    k = uniform_follower_count(qs.shift)
    report = {
        "command": "analyze",
        "alphabet": list(qs.symbols),
        "base": qs.base.element,
        "pruned_symbols": notes.get("pruned_symbols", []),
        "follower_classes": _partition_blocks(parts.follower_classes),
        "predecessor_classes": _partition_blocks(parts.predecessor_classes),
        "cells": _partition_blocks(parts.cells),
        "cell_size": parts.cell_size,
        "class_correspondence": corr,
        "entropy": {
            "exact_symbol_count": k,
            "exact_nats": log(k) if k is not None else None,
            "numeric_nats": entropy(qs.shift),
        },
        "irreducible": is_irreducible(qs.shift),
    }
    _emit(report, f"ok: {len(qs.symbols)} symbols, cell size {parts.cell_size}")
    return 0


def cmd_decompose(args) -> int:
    qs, notes = load_instance(args.instance)
    section = None
    if "section" in notes:
        section = Section.from_mapping(induced_partitions(qs), notes["section"])
    try:
        dec = decompose(qs, verify_len=args.verify_len, section=section)
    except VerificationFailedError as exc:
        _emit(
            {"command": "decompose", "status": "fail", "witness": _jsonable(exc.witness)},
            f"FAIL: {exc}",
        )
        return 1
    report = {
        "command": "decompose",
        "status": "pass",
        "steps": [
            {
                "kind": s.kind,
                "alphabet_before": s.alphabet_before,
                "alphabet_after": s.alphabet_after,
                "detail": s.detail,
            }
            for s in dec.steps
        ],
        "finite_factor": {
            "symbols": list(dec.finite_factor.symbols),
            "orbits": [list(o) for o in dec.orbits],
            "operation": [
                [dec.finite_factor.op.mul(a, b) for b in dec.finite_factor.symbols]
                for a in dec.finite_factor.symbols
            ],
        },
        "full_shift": {
            "symbol_count": dec.full_exponent,
            "symbols": list(dec.digit_symbols),
        },
        "codes": {
            "forward": {"memory": dec.forward.memory, "anticipation": dec.forward.anticipation},
            "backward": {"memory": dec.backward.memory, "anticipation": dec.backward.anticipation},
        },
        "product_operation": {
            "memory": dec.product_rule.memory,
            "anticipation": dec.product_rule.anticipation,
        },
        "entropy": {
            "exact_symbol_count": uniform_follower_count(qs.shift),
            "full_shift_log": log(dec.full_exponent),
            "numeric_nats": entropy(qs.shift),
        },
        "verified_word_length": args.verify_len,
    }
    try:
        report["block_width_bound"] = block_width_bound(dec)
    except NotIrreducibleError:
        report["block_width_bound"] = {"skipped": "shift is not irreducible"}
    if args.emit_code:
        report["codes"]["forward"]["rule"] = {
            "".join(k): v for k, v in sorted(dec.forward.rule.items())
        }
        report["codes"]["backward"]["rule"] = {
            " ".join(k): v for k, v in sorted(dec.backward.rule.items())
        }
    _emit(
        report,
        f"ok: finite factor {len(dec.finite_factor.symbols)} symbols x "
        f"full shift on {dec.full_exponent}",
    )
    return 0


def cmd_moves(args) -> int:
    if args.action == "apply":
        qs, _ = load_instance(args.instance)
        move = moves_mod.Move(args.kind, args.anchor, tuple(args.block.split(",")))
        try:
            res = moves_mod.apply_move(qs, move, verify_len=args.verify_len)
        except moves_mod.InvalidMoveError as exc:
            _emit(
                {"command": "moves", "status": "fail", "reason": exc.reason, "detail": str(exc)},
                f"FAIL: {exc}",
            )
            return 1
        report = {
            "command": "moves",
            "status": "pass",
            "move": {"kind": move.kind, "anchor": move.anchor, "block": list(move.block)},
            "target_alphabet": list(res.target.symbols),
            "forward": {"memory": res.forward.memory, "anticipation": res.forward.anticipation},
            "backward": {"memory": res.backward.memory, "anticipation": res.backward.anticipation},
            "verified_word_length": args.verify_len,
        }
        _emit(report, f"ok: {len(qs.symbols)} -> {len(res.target.symbols)} symbols")
        return 0
    a, _ = load_instance(args.instance)
    b, _ = load_instance(args.other)
    try:
        seq = moves_mod.search_move_sequence(a, b, args.max_depth)
    except moves_mod.NotFoundWithinDepthError as exc:
        _emit(
            {
                "command": "moves",
                "status": "not_found",
                "reason": exc.reason,
                "max_depth": args.max_depth,
                "note": "inconclusive unless the reason is an invariant mismatch",
            },
            f"not found within depth {args.max_depth} ({exc.reason})",
        )
        return 1
    report = {
        "command": "moves",
        "status": "found",
        "sequence": [
            {"kind": m.kind, "anchor": m.anchor, "block": list(m.block)} for m in seq
        ],
        "max_depth": args.max_depth,
    }
    _emit(report, f"ok: sequence of {len(seq)} moves")
    return 0


def cmd_chains(args) -> int:
    qs, _ = load_instance(args.instance)
    try:
        ci = chains_mod.chain_instance(qs, args.radius)
    except chains_mod.HypothesisViolatedError as exc:
        _emit(
            {"command": "chains", "status": "fail", "hypothesis": exc.which, "detail": str(exc)},
            f"FAIL: {exc}",
        )
        return 1
    orders = list(range(1, args.order + 1))
    sizes = {}
    components = {}
    for t in orders:
        comp = chains_mod.chain_component(ci, t)
        components[t] = comp
        sizes[str(t)] = len(comp)
    final = chains_mod.coset_cover(ci, components[orders[-1]])
    report = {
        "command": "chains",
        "status": "pass",
        "radius": args.radius,
        "base_window": list(ci.base_window),
        "base_is_constant": ci.base_is_constant,
        "ground_size": len(ci.ground),
        "component_sizes": sizes,
        "final_partition": [[list(w) for w in tile] for tile in final],
    }
    _emit(report, f"ok: {len(final)} tiles of size {len(components[orders[-1]])}")
    return 0


def cmd_export_dot(args) -> int:
    qs, _ = load_instance(args.instance)
    lines = ["digraph shift {"]
    for s in qs.symbols:
        lines.append(f'  "{s}";')
    for i, s in enumerate(qs.symbols):
        for j in qs.shift.follower_indices(i):
            lines.append(f'  "{s}" -> "{qs.symbols[j]}";')
    lines.append("}")
    print("\n".join(lines))
    print(f"ok: {len(qs.symbols)} nodes", file=sys.stderr)
    return 0


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    return obj


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="quasishift",
        description="Analyze Markov shifts with compatible alphabet quasigroup operations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check the instance and report each validation step")
    p.add_argument("instance")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("analyze", help="class partitions, correspondence, entropy, irreducibility")
    p.add_argument("instance")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("decompose", help="factor into finite part times full shift")
    p.add_argument("instance")
    p.add_argument("--verify-len", type=int, default=8)
    p.add_argument("--emit-code", action="store_true")
    p.set_defaults(fn=cmd_decompose)

    p = sub.add_parser("moves", help="apply an elementary isomorphism or search for a sequence")
    p.add_argument("action", choices=["apply", "search"])
    p.add_argument("instance")
    p.add_argument("other", nargs="?")
    p.add_argument("--kind", choices=list(moves_mod.MOVE_KINDS))
    p.add_argument("--anchor")
    p.add_argument("--block", help="comma-separated symbols")
    p.add_argument("--max-depth", type=int, default=2)
    p.add_argument("--verify-len", type=int, default=8)
    p.set_defaults(fn=cmd_moves)

    p = sub.add_parser("chains", help="chain components and the final coset cover")
    p.add_argument("instance")
    p.add_argument("--radius", type=int, default=1)
    p.add_argument("--order", type=int, default=1)
    p.set_defaults(fn=cmd_chains)

    p = sub.add_parser("export-dot", help="transition digraph in DOT format")
    p.add_argument("instance")
    p.set_defaults(fn=cmd_export_dot)

    args = parser.parse_args(argv)
    if args.command == "moves":
        if args.action == "apply" and not (args.kind and args.anchor and args.block):
            parser.error("moves apply requires --kind, --anchor and --block")
        if args.action == "search" and not args.other:
            parser.error("moves search requires two instance files")
    if args.command == "chains" and args.order > args.radius:
        parser.error("--order cannot exceed --radius")
    try:
        return args.fn(args)
    except ParseError as exc:
        print(json.dumps({"status": "input_error", "detail": str(exc)}, sort_keys=True, indent=2))
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except DomainFailure as exc:
        print(
            json.dumps(
                {"status": "fail", "check": exc.check, "witness": _jsonable(exc.witness)},
                sort_keys=True,
                indent=2,
            )
        )
        print(f"FAIL: {exc}", file=sys.stderr)
        return 1
    except (
        LatinSquareError,
        PartitionError,
        EmptyShiftError,
        IncompatibleOperationError,
        UnequalCardinalitiesError,
    ) as exc:
        witness = list(getattr(exc, "witness", [])) or str(exc)
        print(
            json.dumps({"status": "fail", "witness": _jsonable(witness)}, sort_keys=True, indent=2)
        )
        print(f"FAIL: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line entry point: ``zcancel <subcommand>``.

Exit codes: 0 decisive result, 1 inconclusive or failed checks, 2 usage or
input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from itertools import combinations, combinations_with_replacement, product
from pathlib import Path
from typing import Callable, Optional

from .diagrams import (
    InclusionDiagram,
    Poset,
    SplitSection,
    build_chain_diagram,
    DiagramHom,
    direct_sum_with_constant,
    external_sum_with_z,
    kernel_chain,
    parse_chain,
    verify_chain_hom,
)
from .groups import (
    AmbientFunctional,
    RankOneCancelInstance,
    common_complement_search,
    contains,
    is_surjective,
    lattice_from_generators,
    pair_iso_decide,
    rank_one_cancellation,
    split_check,
    stable_range_witness,
    theorem1_images,
)
from .iso import (
    DEFAULT_COEFF_BOUND,
    DEFAULT_MAX_MODULUS,
    constraint_lattice,
    decide_iso,
    verify_obstruction,
    verify_witness,
)
from .kripke import (
    ParseError,
    classical_tautology,
    countermodel_search,
    forces,
    format_countermodel,
    parse_formula,
)
from .linalg import IntMatrix, format_matrix, hnf, parse_matrix, snf

FIXTURE_DIR = Path(__file__).parent / "fixtures"
FIXTURES = ("a_chain", "b_chain", "c_chain", "b_plus_z", "c_plus_z")

F = AmbientFunctional((1, 0, 0))
G = AmbientFunctional((0, 1, 0))
SPLIT_LEM = "P | (P -> (Q | ~Q))"


class UsageError(Exception):
    pass


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)  # (name, "PASS"/"FAIL", detail)

    def add(self, name: str, ok: bool, detail: str = ""):
        self.checks.append((name, "PASS" if ok else "FAIL", detail))

    @property
    def ok(self) -> bool:
        return all(s == "PASS" for _, s, _ in self.checks)

    def text(self) -> str:
        lines = [f"{s} {name}" + (f": {detail}" if detail else "") for name, s, detail in self.checks]
        lines.append(f"OVERALL {'PASS' if self.ok else 'FAIL'}")
        return "\n".join(lines)

    def as_json(self) -> str:
        recs = [{"check": n, "status": s, "detail": d} for n, s, d in self.checks]
        return json.dumps({"checks": recs, "overall": "PASS" if self.ok else "FAIL"}, indent=2)


def load_fixtures(directory: Path) -> dict:
    out = {}
    for name in FIXTURES:
        path = directory / f"{name}.txt"
        if not path.is_file():
            raise UsageError(f"missing fixture {path}")
        out[name] = parse_chain(path.read_text())
    return out


def _run(report: VerificationReport, name: str, fn: Callable[[], tuple]):
    try:
        ok, detail = fn()
    except Exception as exc:  # a crashing check is a failed check
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    report.add(name, ok, detail)


def cmd_verify_paper(fixture_dir: Path = FIXTURE_DIR) -> VerificationReport:
    fx = load_fixtures(fixture_dir)
    A, B, C = fx["a_chain"], fx["b_chain"], fx["c_chain"]
    BZ, CZ = fx["b_plus_z"], fx["c_plus_z"]
    rep = VerificationReport()

    def a_chain():
        ok = (len(A.nodes) == 3 and A[2] == lattice_from_generators(3, IntMatrix.identity(3))
              and (0, 8, 0) in A[0] and (8, 0, 0) in A[0])
        return ok, f"nodes {A[0]} <= {A[1]} <= {A[2]}"

    def kernels(func, fixture):
        def check():
            k = kernel_chain(A, func)
            bad = [a for a in A.nodes if k[a] != fixture[a]]
            return not bad, "all nodes match" if not bad else f"mismatch at nodes {bad}"
        return check

    def splits(fixture, z, func):
        def check():
            per_node = [split_check(A[a], fixture[a], z, func) for a in A.nodes]
            _, r = direct_sum_with_constant(fixture, SplitSection(z, func), A)
            return all(per_node) and r.ok, f"z={z} at nodes {list(A.nodes)}"
        return check

    def theorem1():
        ip = theorem1_images(A[1], F, G)
        return ip.f_of_ker_g == ip.g_of_ker_f, f"f(ker g) = {ip.f_of_ker_g}, g(ker f) = {ip.g_of_ker_f}"

    def noniso():
        v = decide_iso(B, C)
        if v.kind != "NOT-ISO" or v.certificate is None:
            return False, v.record()
        m = v.certificate.modulus
        ok = 64 % m == 0 and verify_obstruction(constraint_lattice(B, C), v.certificate)
        return ok, f"{v.record()} residues={v.certificate.checked_count}"

    def sum_iso():
        ok_fixtures = BZ == external_sum_with_z(B) and CZ == external_sum_with_z(C)
        v = decide_iso(BZ, CZ)
        ok = ok_fixtures and v.kind == "ISO" and verify_witness(BZ, CZ, v.witness)
        return ok, v.record()

    def two_node():
        res = [pair_iso_decide(B[i], B[2], C[i], C[2]) for i in (0, 1)]
        return all(res), "truncations {0<2} and {1<2} isomorphic"

    def substitution():
        comp = [abs(u[0] * v[1] - u[1] * v[0]) == 1 for u, v in (((1, 0), (0, 1)), ((7, 3), (5, 2)))]
        v, complete = common_complement_search(lattice_from_generators(2, [[0, 1]]),
                                               lattice_from_generators(2, [[5, 2]]), 100)
        return all(comp) and v is None and complete, f"common complement: {v}, complete={complete}"

    def stable_range():
        a, b = stable_range_witness(2, 5), stable_range_witness(3, 2)
        return a is None and b == -1, f"(2,5) -> {a}, (3,2) -> {b}"

    def rank_one():
        r = rank_one_cancellation(RankOneCancelInstance(3, 2, 5))
        ok = r.ok and r.kernel == lattice_from_generators(2, [[15, -2]])
        return ok, f"ker f = {r.kernel}, m = {r.m}"

    def upper_iso():
        k1f = build_chain_diagram(3, [B[1], B[2]])
        k1g = build_chain_diagram(3, [C[1], C[2]])
        phi = IntMatrix.from_rows([[0, 1, 0], [1, 0, -32], [0, 0, 1]])
        r = verify_chain_hom(DiagramHom.uniform(k1f, k1g, phi), require_iso=True)
        return r.ok, "phi(0,1,0) = (1,0,-32), phi(0,0,1) = (0,0,1)"

    def kripke(text, limit, expect_worlds):
        def check():
            f = parse_formula(text)
            cm = countermodel_search(f, limit)
            ok = (cm is not None and len(cm.model.worlds) == expect_worlds
                  and not forces(cm.model, cm.root, f) and classical_tautology(f))
            size = len(cm.model.worlds) if cm else None
            return ok, f"{text}: countermodel with {size} worlds, classical tautology"
        return check

    _run(rep, "A-chain construction", a_chain)
    _run(rep, "kernel table ker f", kernels(F, B))
    _run(rep, "kernel table ker g", kernels(G, C))
    _run(rep, "split A = ker f + Z(1,3,0)", splits(B, (1, 3, 0), F))
    _run(rep, "split A = ker g + Z(3,1,0)", splits(C, (3, 1, 0), G))
    _run(rep, "f(ker g) = g(ker f) on A_1", theorem1)
    _run(rep, "ker f not isomorphic to ker g", noniso)
    _run(rep, "ker f + Z isomorphic to ker g + Z", sum_iso)
    _run(rep, "two-node truncations isomorphic", two_node)
    _run(rep, "Z not substitutable", substitution)
    _run(rep, "stable range witnesses", stable_range)
    _run(rep, "rank-one cancellation d=3 k=2 s=5", rank_one)
    _run(rep, "explicit isomorphism ker_1 f -> ker_1 g", upper_iso)
    _run(rep, "Kripke countermodel Q | ~Q", kripke("Q | ~Q", 2, 2))
    _run(rep, "Kripke countermodel " + SPLIT_LEM, kripke(SPLIT_LEM, 3, 3))
    return rep


def _vee_lattices(n: int, entry_bound: int) -> list:
    """Lattices in Z^n with Hermite bases whose entries are bounded by ``entry_bound``.

    Pivots run over 1..entry_bound, entries above a pivot over [0, pivot),
    all other entries right of a pivot over [-entry_bound, entry_bound].
    """
    out = {}
    for k in range(1, n + 1):
        for cols in combinations(range(n), k):
            slots = []
            for i, c in enumerate(cols):
                for j in range(c + 1, n):
                    slots.append((i, j))
            for pivs in product(range(1, entry_bound + 1), repeat=k):
                ranges = []
                for i, j in slots:
                    if j in cols:
                        ranges.append(range(pivs[cols.index(j)]))
                    else:
                        ranges.append(range(-entry_bound, entry_bound + 1))
                for vals in product(*ranges):
                    m = [[0] * n for _ in range(k)]
                    for i, c in enumerate(cols):
                        m[i][c] = pivs[i]
                    for (i, j), v in zip(slots, vals):
                        m[i][j] = v
                    lat = lattice_from_generators(n, m)
                    out.setdefault(lat, None)
    return list(out)


@dataclass
class ExploreReport:
    candidates: int = 0
    iso: int = 0
    inconclusive: int = 0
    finds: list = field(default_factory=list)
    truncated: bool = False

    def text(self) -> str:
        lines = ["EXPERIMENTAL: V-poset survey, no completeness claim",
                 f"candidates {self.candidates}", f"iso {self.iso}",
                 f"not-iso {len(self.finds)}", f"inconclusive {self.inconclusive}"]
        if self.truncated:
            lines.append("truncated at candidate limit")
        for desc, rec in self.finds:
            lines.append(f"FIND {desc} {rec}")
        return "\n".join(lines)


def cmd_explore_v(rank_bound: int = 2, entry_bound: int = 2, coeff_bound: int = DEFAULT_COEFF_BOUND,
                  max_modulus: int = DEFAULT_MAX_MODULUS, limit: int = 500) -> ExploreReport:
    """Survey V-shaped diagrams A_0 <= A_1, A_0 <= A_2 and compare ker f with ker g."""
    for x in (rank_bound, entry_bound, coeff_bound):
        if x < 1:
            raise UsageError("bounds must be at least 1")
    rep = ExploreReport()
    vee = Poset.vee()
    for n in range(1, rank_bound + 1):
        f = AmbientFunctional([1] + [0] * (n - 1))
        g = AmbientFunctional([0, 1] + [0] * (n - 2)) if n > 1 else f
        lats = _vee_lattices(n, entry_bound)
        for a0 in lats:
            if not (is_surjective(a0, f) and is_surjective(a0, g)):
                continue
            tops = [l for l in lats if contains(l, a0)]
            # nodes 1 and 2 are symmetric, so unordered pairs suffice
            for a1, a2 in combinations_with_replacement(tops, 2):
                if rep.candidates >= limit:
                    rep.truncated = True
                    return rep
                rep.candidates += 1
                A = InclusionDiagram(vee, n, {0: a0, 1: a1, 2: a2})
                v = decide_iso(kernel_chain(A, f), kernel_chain(A, g), coeff_bound, max_modulus)
                if v.kind == "ISO":
                    rep.iso += 1
                elif v.kind == "INCONCLUSIVE":
                    rep.inconclusive += 1
                else:
                    rep.finds.append((f"A0={a0} A1={a1} A2={a2}", v.record()))
    return rep


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _verdict_dump(v) -> dict:
    out = {"record": v.record(), "kind": v.kind}
    if v.witness is not None:
        out["witness"] = {str(a): m.tolist() for a, m in v.witness.node_maps.items()}
    if v.certificate is not None:
        out["certificate"] = {"modulus": v.certificate.modulus,
                              "checked_count": v.certificate.checked_count}
    if v.mismatch is not None:
        out["mismatch"] = v.mismatch
    if v.skipped_moduli:
        out["skipped_moduli"] = list(v.skipped_moduli)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zcancel", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    s = sub.add_parser("verify-paper", help="reproduce every worked example")
    s.add_argument("--json", action="store_true")
    s.add_argument("--fixtures", type=Path, default=FIXTURE_DIR, help=argparse.SUPPRESS)

    s = sub.add_parser("iso", help="decide isomorphism of two chain files")
    s.add_argument("--left", required=True)
    s.add_argument("--right", required=True)
    s.add_argument("--coeff-bound", type=int, default=DEFAULT_COEFF_BOUND)
    s.add_argument("--max-modulus", type=int, default=DEFAULT_MAX_MODULUS)
    s.add_argument("--json", action="store_true")
    s.add_argument("--verbose", action="store_true", help="dump the witness or certificate")

    for name in ("hnf", "snf"):
        s = sub.add_parser(name, help=f"{name.upper()} of a matrix file")
        s.add_argument("file")

    s = sub.add_parser("kripke", help="search for a Kripke countermodel")
    s.add_argument("--formula", required=True)
    s.add_argument("--max-worlds", type=int, default=3)

    s = sub.add_parser("explore-v", help="experimental V-poset survey")
    s.add_argument("--rank-bound", type=int, default=2)
    s.add_argument("--entry-bound", type=int, default=2)
    s.add_argument("--coeff-bound", type=int, default=DEFAULT_COEFF_BOUND)
    s.add_argument("--max-modulus", type=int, default=DEFAULT_MAX_MODULUS)
    s.add_argument("--limit", type=int, default=500, help="maximum number of candidates")
    return p


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return _dispatch(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.cmd == "verify-paper":
        rep = cmd_verify_paper(args.fixtures)
        print(rep.as_json() if args.json else rep.text())
        return 0 if rep.ok else 1

    if args.cmd == "iso":
        try:
            left = parse_chain(_read(args.left))
            right = parse_chain(_read(args.right))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if left.poset != right.poset:
            raise UsageError("chain files have different numbers of nodes")
        if args.coeff_bound < 1 or args.max_modulus < 1:
            raise UsageError("bounds must be at least 1")
        v = decide_iso(left, right, args.coeff_bound, args.max_modulus)
        if args.json:
            print(json.dumps(_verdict_dump(v), indent=2))
        else:
            print(v.record())
            if args.verbose:
                print(json.dumps(_verdict_dump(v), indent=2))
        return 1 if v.kind == "INCONCLUSIVE" else 0

    if args.cmd in ("hnf", "snf"):
        try:
            m = parse_matrix(_read(args.file))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        if args.cmd == "hnf":
            res = hnf(m)
            print("# h\n" + format_matrix(res.h) + "# u\n" + format_matrix(res.u), end="")
        else:
            res = snf(m)
            print("# d\n" + format_matrix(res.d) + "# l\n" + format_matrix(res.l)
                  + "# r\n" + format_matrix(res.r), end="")
        return 0

    if args.cmd == "kripke":
        if args.max_worlds < 1:
            raise UsageError("--max-worlds must be at least 1")
        f = parse_formula(args.formula)
        cm = countermodel_search(f, args.max_worlds)
        if cm is None:
            print(f"VALID-UP-TO {args.max_worlds}")
        else:
            print("NOT-VALID")
            print(format_countermodel(cm))
        return 0

    if args.cmd == "explore-v":
        rep = cmd_explore_v(args.rank_bound, args.entry_bound, args.coeff_bound,
                            args.max_modulus, args.limit)
        print(rep.text())
        return 0
    raise UsageError(f"unknown command {args.cmd}")


if __name__ == "__main__":
    sys.exit(main())

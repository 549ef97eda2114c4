"""Inclusion diagrams of lattices over a finite poset with a least element.

Every structure map is an inclusion inside one ambient Z^n.  The constant
diagram Z is an inclusion diagram in Z^1 with every node equal to Z.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Mapping, Optional, Sequence

from .groups import (
    AmbientFunctional,
    ContainmentError,
    Lattice,
    full_lattice,
    kernel_of_functional,
    lattice_from_generators,
    member,
    split_check,
    sum_lattice,
)
from .linalg import IntMatrix

__all__ = [
    "Poset",
    "InclusionDiagram",
    "DiagramHom",
    "SplitSection",
    "HomReport",
    "InclusionError",
    "build_chain_diagram",
    "build_diagram",
    "constant_diagram",
    "induced_hom_to_constant",
    "kernel_chain",
    "verify_chain_hom",
    "direct_sum_with_constant",
    "external_sum_with_z",
    "parse_chain",
    "format_chain",
]


class InclusionError(ContainmentError):
    def __init__(self, lower, upper, generator):
        self.lower, self.upper, self.generator = lower, upper, generator
        super().__init__(
            f"node {lower} is not contained in node {upper}: "
            f"generator {generator} is missing"
        )


@dataclass(frozen=True)
class Poset:
    elements: tuple
    leq: frozenset

    def __post_init__(self):
        els = set(self.elements)
        if len(els) != len(self.elements):
            raise ValueError("duplicate poset elements")
        for a, b in self.leq:
            if a not in els or b not in els:
                raise ValueError(f"relation ({a}, {b}) mentions an unknown element")
        for a in self.elements:
            if (a, a) not in self.leq:
                raise ValueError(f"relation is not reflexive at {a}")
        for a, b in self.leq:
            if a != b and (b, a) in self.leq:
                raise ValueError(f"relation is not antisymmetric at ({a}, {b})")
        for (a, b), (c, d) in product(self.leq, repeat=2):
            if b == c and (a, d) not in self.leq:
                raise ValueError(f"relation is not transitive at {a} <= {b} <= {d}")
        if self.elements and self.least() is None:
            raise ValueError("poset has no least element")

    @classmethod
    def from_relations(cls, elements, pairs) -> Poset:
        """Reflexive-transitive closure of ``pairs``."""
        elements = tuple(elements)
        rel = {(a, a) for a in elements} | set(pairs)
        changed = True
        while changed:
            extra = {(a, d) for (a, b) in rel for (c, d) in rel if b == c} - rel
            rel |= extra
            changed = bool(extra)
        return cls(elements, frozenset(rel))

    @classmethod
    def chain(cls, k: int) -> Poset:
        return cls(tuple(range(k)), frozenset((i, j) for i in range(k) for j in range(i, k)))

    @classmethod
    def vee(cls) -> Poset:
        """Least element 0 below two incomparable nodes 1 and 2."""
        return cls.from_relations((0, 1, 2), [(0, 1), (0, 2)])

    def le(self, a, b) -> bool:
        return (a, b) in self.leq

    def least(self):
        for a in self.elements:
            if all((a, b) in self.leq for b in self.elements):
                return a
        return None

    def maximal(self) -> tuple:
        return tuple(a for a in self.elements
                     if not any(b != a and (a, b) in self.leq for b in self.elements))

    def up(self, a) -> tuple:
        return tuple(b for b in self.elements if (a, b) in self.leq)

    def pairs(self) -> list:
        """Strict relations ``i < j`` in element order."""
        idx = {a: n for n, a in enumerate(self.elements)}
        return sorted(((a, b) for a, b in self.leq if a != b), key=lambda p: (idx[p[0]], idx[p[1]]))

    def __len__(self):
        return len(self.elements)


@dataclass(frozen=True)
class InclusionDiagram:
    poset: Poset
    ambient_dim: int
    node_lattices: Mapping

    def __post_init__(self):
        if set(self.node_lattices) != set(self.poset.elements):
            raise ValueError("node lattices do not match the poset elements")
        for node, l in self.node_lattices.items():
            if l.ambient_dim != self.ambient_dim:
                raise ValueError(f"node {node} lives in Z^{l.ambient_dim}, expected Z^{self.ambient_dim}")
        for i, j in self.poset.pairs():
            lo, hi = self.node_lattices[i], self.node_lattices[j]
            for g in lo.spanning_rows():
                if not member(hi, g):
                    raise InclusionError(i, j, g)

    def __getitem__(self, node) -> Lattice:
        return self.node_lattices[node]

    @property
    def nodes(self) -> tuple:
        return self.poset.elements

    def __eq__(self, other):
        if not isinstance(other, InclusionDiagram):
            return NotImplemented
        return (self.poset == other.poset and self.ambient_dim == other.ambient_dim
                and dict(self.node_lattices) == dict(other.node_lattices))

    def __hash__(self):
        return hash((self.poset, self.ambient_dim, tuple(self.node_lattices[a] for a in self.nodes)))


def build_diagram(poset: Poset, ambient_dim: int, lattices: Mapping) -> InclusionDiagram:
    return InclusionDiagram(poset, ambient_dim, dict(lattices))


def build_chain_diagram(ambient_dim: int, lattices: Sequence[Lattice]) -> InclusionDiagram:
    if not lattices:
        raise ValueError("a chain needs at least one node")
    return InclusionDiagram(Poset.chain(len(lattices)), ambient_dim, dict(enumerate(lattices)))


def constant_diagram(poset: Poset, n: int = 1) -> InclusionDiagram:
    return InclusionDiagram(poset, n, {a: full_lattice(n) for a in poset.elements})


@dataclass(frozen=True)
class DiagramHom:
    """Node maps are ambient matrices acting on row vectors: ``v -> v @ M``."""

    source: InclusionDiagram
    target: InclusionDiagram
    node_maps: Mapping

    def __post_init__(self):
        if self.source.poset != self.target.poset:
            raise ValueError("source and target diagrams use different posets")
        for a in self.source.nodes:
            m = self.node_maps[a]
            if m.shape != (self.source.ambient_dim, self.target.ambient_dim):
                raise ValueError(f"node {a} map has shape {m.shape}")

    @classmethod
    def uniform(cls, source, target, m: IntMatrix) -> DiagramHom:
        return cls(source, target, {a: m for a in source.nodes})


@dataclass(frozen=True)
class SplitSection:
    z: tuple
    functional: AmbientFunctional

    def __post_init__(self):
        if self.functional(self.z) != 1:
            raise ValueError(f"functional sends {self.z} to {self.functional(self.z)}, not 1")


def induced_hom_to_constant(d: InclusionDiagram, f: AmbientFunctional) -> DiagramHom:
    if f.dim != d.ambient_dim:
        raise ValueError("functional and diagram dimensions differ")
    col = IntMatrix(tuple((c,) for c in f.coeffs), 1)
    return DiagramHom.uniform(d, constant_diagram(d.poset), col)


def kernel_chain(d: InclusionDiagram, f: AmbientFunctional) -> InclusionDiagram:
    """Node-wise kernels of ``f``; works for any poset, not only chains."""
    return InclusionDiagram(d.poset, d.ambient_dim,
                            {a: kernel_of_functional(d[a], f) for a in d.nodes})


@dataclass
class HomReport:
    """Per-node findings, ordered by node id.  ``entries`` holds (node, check, ok, detail)."""

    entries: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(e[2] for e in self.entries)

    def add(self, node, check, ok, detail=""):
        self.entries.append((node, check, bool(ok), detail))

    def failures(self):
        return [e for e in self.entries if not e[2]]

    def __bool__(self):
        return self.ok


def verify_chain_hom(h: DiagramHom, require_iso: bool = False) -> HomReport:
    """Check containment and commuting squares at every node; optionally bijectivity.

    Violations are recorded in the report, never raised.  Each failing
    entry names the first offending generator in basis order.
    """
    rep = HomReport()
    src, tgt = h.source, h.target
    for a in src.nodes:
        m = h.node_maps[a]
        images = [m.apply(g) for g in src[a].basis.rows]
        bad = next((g for g, im in zip(src[a].basis.rows, images) if not member(tgt[a], im)), None)
        rep.add(a, "containment", bad is None,
                "" if bad is None else f"{bad} maps to {m.apply(bad)}, outside {tgt[a]}")
        for b in src.poset.up(a):
            if b == a:
                continue
            mb = h.node_maps[b]
            off = next((g for g in src[a].basis.rows if m.apply(g) != mb.apply(g)), None)
            rep.add(a, f"commutes with node {b}", off is None,
                    "" if off is None else f"{off} maps differently at nodes {a} and {b}")
        if require_iso:
            img = lattice_from_generators(tgt.ambient_dim, IntMatrix(tuple(images), tgt.ambient_dim))
            injective = img.rank == src[a].rank
            onto = img == tgt[a]
            detail = []
            if not injective:
                detail.append(f"image rank {img.rank} < source rank {src[a].rank}")
            if not onto:
                detail.append(f"image {img} differs from target {tgt[a]}")
            rep.add(a, "bijective", injective and onto, "; ".join(detail))
    return rep


def direct_sum_with_constant(d: InclusionDiagram, s: SplitSection,
                             ambient: Optional[InclusionDiagram] = None):
    """Node-wise internal sums ``d[i] + Z z``, checked to be direct.

    Returns ``(sum_diagram, report)``.  With ``ambient`` given the report
    also checks that the sums reproduce it and that each node of ``d`` is
    the kernel of the section's functional there.
    """
    rep = HomReport()
    z = tuple(s.z)
    least = d.poset.least()
    zl = lattice_from_generators(d.ambient_dim, [z])
    sums = {}
    for a in d.nodes:
        total = sum_lattice(d[a], zl)
        direct = total.rank == d[a].rank + 1
        if not direct:
            raise ContainmentError(f"sum at node {a} is not direct: {z} is dependent on {d[a]}")
        sums[a] = total
        rep.add(a, "direct", True)
    out = InclusionDiagram(d.poset, d.ambient_dim, sums)
    if ambient is not None:
        if not member(ambient[least], z):
            raise ContainmentError(f"{z} is not in the least node {ambient[least]}")
        for a in d.nodes:
            rep.add(a, "reproduces ambient", sums[a] == ambient[a],
                    "" if sums[a] == ambient[a] else f"{sums[a]} != {ambient[a]}")
            rep.add(a, "split", split_check(ambient[a], d[a], z, s.functional))
    return out, rep


def external_sum_with_z(d: InclusionDiagram) -> InclusionDiagram:
    """The diagram ``d + Z`` realised in Z^(n+1), with Z on the new last coordinate."""
    n = d.ambient_dim
    e = tuple([0] * n + [1])
    nodes = {}
    for a in d.nodes:
        rows = [tuple(r) + (0,) for r in d[a].basis.rows] + [e]
        nodes[a] = lattice_from_generators(n + 1, IntMatrix(tuple(rows), n + 1))
    return InclusionDiagram(d.poset, n + 1, nodes)


def parse_chain(text: str) -> InclusionDiagram:
    """Parse the chain file format::

        ambient 3
        nodes 3
        node 0
        1 3 0
        3 1 0
        node 1
        ...

    Blank lines and ``#`` comments are ignored.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]

    def keyword(ln, word):
        parts = ln.split()
        if len(parts) != 2 or parts[0] != word:
            raise ValueError(f"expected '{word} <int>', got {ln!r}")
        return int(parts[1])

    if len(lines) < 2:
        raise ValueError("chain file needs 'ambient' and 'nodes' headers")
    n = keyword(lines[0], "ambient")
    k = keyword(lines[1], "nodes")
    gens: dict[int, list] = {}
    cur = None
    for ln in lines[2:]:
        if ln.startswith("node"):
            cur = keyword(ln, "node")
            if cur != len(gens):
                raise ValueError(f"node {cur} out of order; expected node {len(gens)}")
            gens[cur] = []
            continue
        if cur is None:
            raise ValueError(f"generator row before any 'node' line: {ln!r}")
        row = [int(x) for x in ln.split()]
        if len(row) != n:
            raise ValueError(f"generator {row} has {len(row)} entries, ambient is {n}")
        gens[cur].append(row)
    if len(gens) != k:
        raise ValueError(f"declared {k} nodes, found {len(gens)}")
    lats = [lattice_from_generators(n, IntMatrix.from_rows(gens[i], n)) for i in range(k)]
    return build_chain_diagram(n, lats)


def format_chain(d: InclusionDiagram) -> str:
    lines = [f"ambient {d.ambient_dim}", f"nodes {len(d.nodes)}"]
    for a in d.nodes:
        lines.append(f"node {a}")
        lines += [" ".join(map(str, r)) for r in d[a].basis.rows]
    return "\n".join(lines) + "\n"

"""Orthogonality graph over SH vectors, clique search and export."""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import comb
from typing import Iterator

from .core import ShVector, inner_product
from .errors import CapacityError
from .vectorspace import enumerate_sh_vectors, orthogonal_set

# Adjacency entries (N_V * N_O); k=3 needs 369600, k=4 needs 63 million.
GRAPH_CAP = 10**7
CLIQUE_BUDGET = 10**6

EXPORT_FORMATS = ("dot", "json", "edges")


@dataclass(frozen=True)
class OrthoGraph:
    """Vertices are SH vectors in lexicographic order; edges join orthogonal pairs."""

    k: int
    vectors: tuple[ShVector, ...]
    adjacency: tuple[tuple[int, ...], ...]

    @property
    def vertex_count(self) -> int:
        return len(self.vectors)

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency]

    def is_regular(self, d: int | None = None) -> bool:
        degs = set(self.degrees())
        return len(degs) == 1 and (d is None or degs == {d})

    def is_symmetric(self) -> bool:
        sets = [set(a) for a in self.adjacency]
        return all(i in sets[j] for i, a in enumerate(self.adjacency) for j in a)

    def edges(self) -> Iterator[tuple[int, int]]:
        for i, nbrs in enumerate(self.adjacency):
            for j in nbrs:
                if j > i:
                    yield i, j

    def index_of(self, v: ShVector) -> int:
        return self._index[v.bits]

    @property
    def _index(self) -> dict[int, int]:
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {v.bits: i for i, v in enumerate(self.vectors)}
            object.__setattr__(self, "_idx", idx)
        return idx


def build_ortho_graph(k: int, cap: int = GRAPH_CAP) -> OrthoGraph:
    n_v = comb(4 * k, 2 * k)
    n_o = comb(2 * k, k) ** 2
    if n_v * n_o > cap:
        raise CapacityError(
            f"graph for k={k} needs {n_v * n_o} adjacency entries, cap is {cap}",
            required=n_v * n_o,
            limit=cap,
        )
    vectors = tuple(enumerate_sh_vectors(k))
    index = {v.bits: i for i, v in enumerate(vectors)}
    adjacency = tuple(
        tuple(sorted(index[u.bits] for u in orthogonal_set(v))) for v in vectors
    )
    return OrthoGraph(k, vectors, adjacency)


def brute_force_graph(k: int) -> OrthoGraph:
    """All-pairs construction; the reference the theorem-based builder is checked against."""
    vectors = tuple(enumerate_sh_vectors(k))
    adjacency = tuple(
        tuple(j for j, u in enumerate(vectors) if inner_product(u, v) == 0) for v in vectors
    )
    return OrthoGraph(k, vectors, adjacency)


def edge_count(g: OrthoGraph) -> int:
    return sum(g.degrees()) // 2


def _bits_of(word: int) -> Iterator[int]:
    while word:
        low = word & -word
        yield low.bit_length() - 1
        word ^= low


def find_cliques(
    g: OrthoGraph, size: int | None = None, max_cliques: int = CLIQUE_BUDGET
) -> Iterator[tuple[int, ...]]:
    """Yield every (4k-1)-clique of ``g`` as a sorted vertex tuple.

    Bron-Kerbosch with pivoting, pruned to branches that can still reach
    ``size``.  A (4k-1)-clique plus the unity column is a full-rank
    orthogonal matrix, so no vector extends it; such cliques are maximal and
    pivoting loses none of them.
    """
    target = 4 * g.k - 1
    if size is None:
        size = target
    if size != target:
        raise ValueError(f"clique size must be 4k-1 = {target}, got {size}")
    nbr = [sum(1 << j for j in adj) for adj in g.adjacency]
    found = 0

    def expand(R: list[int], P: int, X: int):
        nonlocal found
        if len(R) == size:
            found += 1
            if found > max_cliques:
                raise CapacityError(
                    f"more than {max_cliques} cliques of size {size}", limit=max_cliques
                )
            yield tuple(sorted(R))
            return
        if len(R) + P.bit_count() < size:
            return
        pivot = max(_bits_of(P | X), key=lambda u: (P & nbr[u]).bit_count())
        for v in _bits_of(P & ~nbr[pivot]):
            R.append(v)
            yield from expand(R, P & nbr[v], X & nbr[v])
            R.pop()
            P &= ~(1 << v)
            X |= 1 << v

    yield from expand([], (1 << g.vertex_count) - 1, 0)


def export_graph(g: OrthoGraph, fmt: str) -> bytes:
    """Serialize deterministically; vertices are labelled by their +/- string."""
    labels = [str(v) for v in g.vectors]
    if fmt == "dot":
        lines = [f"graph ortho_k{g.k} {{"]
        lines += [f'  "{lab}";' for lab in labels]
        lines += [f'  "{labels[i]}" -- "{labels[j]}";' for i, j in g.edges()]
        lines.append("}")
        return ("\n".join(lines) + "\n").encode()
    if fmt == "json":
        doc = {"k": g.k, "vertices": labels, "adjacency": [list(a) for a in g.adjacency]}
        return (json.dumps(doc, separators=(",", ":")) + "\n").encode()
    if fmt == "edges":
        return "".join(f"{labels[i]} {labels[j]}\n" for i, j in g.edges()).encode()
    raise ValueError(f"unknown export format {fmt!r}; expected one of {EXPORT_FORMATS}")


def graph_from_json(data: bytes | str) -> OrthoGraph:
    doc = json.loads(data)
    vectors = tuple(ShVector.from_string(s) for s in doc["vertices"])
    return OrthoGraph(doc["k"], vectors, tuple(tuple(a) for a in doc["adjacency"]))

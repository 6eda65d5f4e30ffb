"""Provenance DAG from operand terms to the composed terms they produced."""

from collections import defaultdict


class ProvenanceGraph:
    """Vertices are term ids (with their terms); an edge ``(u, w)`` means u was used to build w.

    One instance per composition is a composition graph; the union over a
    whole composition order is the diagnostics graph.
    """

    def __init__(self):
        self.terms = {}
        self.edges = set()
        self._parents = defaultdict(set)

    def add_vertex(self, tid, term):
        self.terms[tid] = term

    def add_edge(self, src, dst):
        if src not in self.terms or dst not in self.terms:
            raise KeyError(f"edge ({src}, {dst}) references an unknown vertex")
        self.edges.add((src, dst))
        self._parents[dst].add(src)

    def __contains__(self, tid):
        return tid in self.terms

    def __len__(self):
        return len(self.terms)

    @property
    def vertices(self):
        return sorted(self.terms)

    def sorted_edges(self):
        return sorted(self.edges)

    def parents(self, tid):
        return set(self._parents.get(tid, ()))

    def in_degree(self, tid):
        return len(self._parents.get(tid, ()))

    def ancestors(self, tid):
        """All vertices with a path to ``tid`` (``tid`` itself excluded)."""
        seen, stack = set(), [tid]
        while stack:
            for p in self._parents.get(stack.pop(), ()):
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return seen

    def leaves_above(self, tid):
        """In-degree-0 vertices with a path to ``tid``; ``tid`` itself if it is a leaf."""
        if tid not in self.terms:
            raise KeyError(f"unknown vertex {tid}")
        cands = self.ancestors(tid) | {tid}
        return {v for v in cands if self.in_degree(v) == 0}

    def union(self, other):
        out = ProvenanceGraph()
        for g in (self, other):
            out.terms.update(g.terms)
            for u, w in g.edges:
                out.edges.add((u, w))
                out._parents[w].add(u)
        return out

    __or__ = union

    def __repr__(self):
        return f"ProvenanceGraph({len(self.terms)} vertices, {len(self.edges)} edges)"


CompositionGraph = ProvenanceGraph
DiagnosticsGraph = ProvenanceGraph

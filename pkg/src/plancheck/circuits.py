"""Hash-consed boolean circuit DAGs.

One Circuit instance owns all nodes it creates; structurally identical
subcircuits are interned to the same node, so downstream CNF encoding emits
each shared gate once.  Constant folding and a few local identities keep the
DAGs small but never change the function computed.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping

IN, NOT, AND, OR, CONST = "in", "not", "and", "or", "const"


class Node:
    __slots__ = ("nid", "kind", "name", "value", "a", "b")

    def __init__(self, nid, kind, name=None, value=None, a=None, b=None):
        self.nid = nid
        self.kind = kind
        self.name = name
        self.value = value
        self.a = a
        self.b = b

    def __repr__(self):
        if self.kind == IN:
            return f"In({self.name})"
        if self.kind == CONST:
            return "TRUE" if self.value else "FALSE"
        return f"{self.kind}#{self.nid}"


class Circuit:
    def __init__(self) -> None:
        self._nodes: list[Node] = []
        self._memo: dict[tuple, Node] = {}
        self.true = self._make(CONST, value=True)
        self.false = self._make(CONST, value=False)

    def _make(self, kind, name=None, value=None, a=None, b=None) -> Node:
        n = Node(len(self._nodes), kind, name, value, a, b)
        self._nodes.append(n)
        return n

    def const(self, v: bool) -> Node:
        return self.true if v else self.false

    def input(self, name: str) -> Node:
        key = (IN, name)
        n = self._memo.get(key)
        if n is None:
            n = self._make(IN, name=name)
            self._memo[key] = n
        return n

    def not_(self, x: Node) -> Node:
        if x.kind == CONST:
            return self.const(not x.value)
        if x.kind == NOT:
            return x.a
        key = (NOT, x.nid)
        n = self._memo.get(key)
        if n is None:
            n = self._make(NOT, a=x)
            self._memo[key] = n
        return n

    def and_(self, x: Node, y: Node) -> Node:
        if x.kind == CONST:
            return y if x.value else self.false
        if y.kind == CONST:
            return x if y.value else self.false
        if x is y:
            return x
        if (x.kind == NOT and x.a is y) or (y.kind == NOT and y.a is x):
            return self.false
        if x.nid > y.nid:
            x, y = y, x
        key = (AND, x.nid, y.nid)
        n = self._memo.get(key)
        if n is None:
            n = self._make(AND, a=x, b=y)
            self._memo[key] = n
        return n

    def or_(self, x: Node, y: Node) -> Node:
        if x.kind == CONST:
            return self.true if x.value else y
        if y.kind == CONST:
            return self.true if y.value else x
        if x is y:
            return x
        if (x.kind == NOT and x.a is y) or (y.kind == NOT and y.a is x):
            return self.true
        if x.nid > y.nid:
            x, y = y, x
        key = (OR, x.nid, y.nid)
        n = self._memo.get(key)
        if n is None:
            n = self._make(OR, a=x, b=y)
            self._memo[key] = n
        return n

    def and_all(self, xs: Iterable[Node]) -> Node:
        out = self.true
        for x in xs:
            out = self.and_(out, x)
        return out

    def or_all(self, xs: Iterable[Node]) -> Node:
        out = self.false
        for x in xs:
            out = self.or_(out, x)
        return out

    def ite(self, g: Node, t: Node, e: Node) -> Node:
        return self.or_(self.and_(g, t), self.and_(self.not_(g), e))

    def xnor(self, x: Node, y: Node) -> Node:
        return self.ite(x, y, self.not_(y))


def topo_order(roots: Iterable[Node]) -> list[Node]:
    """Children-before-parents ordering of the reachable DAG."""
    out: list[Node] = []
    seen: set[int] = set()
    stack: list[tuple[Node, bool]] = [(r, False) for r in reversed(list(roots))]
    while stack:
        node, done = stack.pop()
        if done:
            out.append(node)
            continue
        if node.nid in seen:
            continue
        seen.add(node.nid)
        stack.append((node, True))
        if node.b is not None:
            stack.append((node.b, False))
        if node.a is not None:
            stack.append((node.a, False))
    return out


def evaluate(root: Node, env: Mapping[str, bool]) -> bool:
    """Evaluate the circuit under a total assignment of its inputs."""
    vals: dict[int, bool] = {}
    for n in topo_order([root]):
        if n.kind == CONST:
            vals[n.nid] = n.value
        elif n.kind == IN:
            vals[n.nid] = bool(env[n.name])
        elif n.kind == NOT:
            vals[n.nid] = not vals[n.a.nid]
        elif n.kind == AND:
            vals[n.nid] = vals[n.a.nid] and vals[n.b.nid]
        else:
            vals[n.nid] = vals[n.a.nid] or vals[n.b.nid]
    return vals[root.nid]


def instantiate(dst: Circuit, root: Node, rename: Callable[[str], str]) -> Node:
    """Copy a circuit into ``dst`` with inputs renamed.

    ``dst`` may be the circuit that owns ``root``; interning keeps repeated
    instantiations of the same template cheap.
    """
    out: dict[int, Node] = {}
    for n in topo_order([root]):
        if n.kind == CONST:
            out[n.nid] = dst.const(n.value)
        elif n.kind == IN:
            out[n.nid] = dst.input(rename(n.name))
        elif n.kind == NOT:
            out[n.nid] = dst.not_(out[n.a.nid])
        elif n.kind == AND:
            out[n.nid] = dst.and_(out[n.a.nid], out[n.b.nid])
        else:
            out[n.nid] = dst.or_(out[n.a.nid], out[n.b.nid])
    return out[root.nid]


def inputs_of(root: Node) -> list[str]:
    return [n.name for n in topo_order([root]) if n.kind == IN]

"""Permutation gates and their Choi target states.

Every gate handled here maps computational basis tuples to basis tuples:
SWAP, controlled-X (modulo addition on the target), the Toffoli gate
(CCX) and the Fredkin gate (CSWAP). A graph realizes a gate when its
post-selected state equals

    1/sqrt(D) * sum_x |x>_inputs |gate(x)>_outputs |fixed modes>_ancillas

with ``D`` the number of input basis tuples.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .graph import ANCILLA, INPUT, OUTPUT, Graph
from .matchings import Ket

Basis = tuple[int, ...]


class GateError(ValueError):
    pass


class GateSpecParseError(GateError):
    """A gate spec string could not be parsed; ``token`` is the culprit."""

    def __init__(self, token: str, reason: str):
        super().__init__(f"bad gate spec token {token!r}: {reason}")
        self.token = token


class LayoutError(GateError):
    pass


@dataclass(frozen=True)
class GateSpec:
    name: str
    input_dims: tuple[int, ...]
    output_dims: tuple[int, ...]
    truth: dict[Basis, Basis] = field(compare=False, hash=False)
    ancilla_modes: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "input_dims", tuple(self.input_dims))
        object.__setattr__(self, "output_dims", tuple(self.output_dims))
        object.__setattr__(self, "ancilla_modes", tuple(self.ancilla_modes))
        if self.input_dims != self.output_dims:
            raise GateError(f"{self.name}: input dims {self.input_dims} "
                            f"!= output dims {self.output_dims}")
        domain = set(basis_tuples(self.input_dims))
        if set(self.truth) != domain:
            raise GateError(f"{self.name}: truth map is not total on the basis")

    @property
    def arity(self) -> int:
        return len(self.input_dims)

    @property
    def size(self) -> int:
        return math.prod(self.input_dims)

    def is_bijection(self) -> bool:
        return is_bijection(self.truth, self.input_dims)

    def with_ancillas(self, count: int, modes: Iterable[int] | None = None) -> GateSpec:
        modes = tuple(modes) if modes is not None else (0,) * count
        if len(modes) != count:
            raise GateError("one fixed mode per ancilla is required")
        return GateSpec(self.name, self.input_dims, self.output_dims,
                        dict(self.truth), modes)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GateSpec):
            return NotImplemented
        return (self.input_dims == other.input_dims
                and self.ancilla_modes == other.ancilla_modes
                and self.truth == other.truth)

    def __hash__(self) -> int:
        return hash((self.input_dims, self.ancilla_modes,
                     tuple(sorted(self.truth.items()))))


def basis_tuples(dims: Sequence[int]) -> list[Basis]:
    return list(itertools.product(*(range(d) for d in dims)))


def is_bijection(truth: dict[Basis, Basis], dims: Sequence[int]) -> bool:
    domain = basis_tuples(dims)
    images = [truth[x] for x in domain]
    return (len(set(images)) == len(domain)
            and all(len(y) == len(dims) and all(0 <= v < d for v, d in zip(y, dims))
                    for y in images))


def _from_function(name: str, dims: Sequence[int],
                   fn: Callable[[Basis], Basis]) -> GateSpec:
    dims = tuple(dims)
    return GateSpec(name, dims, dims, {x: tuple(fn(x)) for x in basis_tuples(dims)})


def identity(d: int = 2) -> GateSpec:
    """Single-photon identity channel (what a teleportation should realize)."""
    return _from_function(f"teleport:{d}", (d,), lambda x: x)


def shift(d: int = 2, k: int = 1) -> GateSpec:
    """Single-qudit X^k: |t> -> |t + k mod d>."""
    return _from_function(f"x:{d}", (d,), lambda x: ((x[0] + k) % d,))


def swap(d: int = 2) -> GateSpec:
    return _from_function(f"swap:{d}", (d, d), lambda x: (x[1], x[0]))


def cx(dc: int = 2, dt: int = 2) -> GateSpec:
    """|c, t> -> |c, (t + c) mod dt>."""
    return _from_function(f"cx:{dc},{dt}", (dc, dt),
                          lambda x: (x[0], (x[1] + x[0]) % dt))


def ccx(dt: int = 2) -> GateSpec:
    """Toffoli: |c1, c2, t> -> |c1, c2, (t + (c1 and c2)) mod dt>."""
    return _from_function(f"ccx:{dt}", (2, 2, dt),
                          lambda x: (x[0], x[1], (x[2] + (x[0] & x[1])) % dt))


def cswap() -> GateSpec:
    """Fredkin: swaps the two targets when the control is 1."""
    return _from_function("cswap", (2, 2, 2),
                          lambda x: (0, x[1], x[2]) if x[0] == 0 else (1, x[2], x[1]))


def apply_gate(spec: GateSpec, x: Iterable[int]) -> Basis:
    x = tuple(x)
    if len(x) != spec.arity:
        raise GateError(f"{spec.name} takes {spec.arity} inputs, got {len(x)}")
    for v, d in zip(x, spec.input_dims):
        if not (isinstance(v, int) and 0 <= v < d):
            raise GateError(f"{spec.name}: input {x} out of range for dims {spec.input_dims}")
    return spec.truth[x]


def compose_specs(first: GateSpec, second: GateSpec) -> GateSpec:
    """Gate that applies ``first`` and then ``second``."""
    if first.output_dims != second.input_dims:
        raise GateError(f"cannot compose {first.name} (out {first.output_dims}) "
                        f"with {second.name} (in {second.input_dims})")
    truth = {x: second.truth[y] for x, y in first.truth.items()}
    return GateSpec(f"{second.name}*{first.name}", first.input_dims,
                    second.output_dims, truth,
                    first.ancilla_modes + second.ancilla_modes)


def tensor_specs(*specs: GateSpec) -> GateSpec:
    """Independent channels side by side."""
    dims: tuple[int, ...] = ()
    for s in specs:
        dims += s.input_dims
    truth = {}
    for x in basis_tuples(dims):
        y: Basis = ()
        i = 0
        for s in specs:
            y += s.truth[x[i:i + s.arity]]
            i += s.arity
        truth[x] = y
    modes: tuple[int, ...] = ()
    for s in specs:
        modes += s.ancilla_modes
    return GateSpec("(x)".join(s.name for s in specs), dims, dims, truth, modes)


def rewire_outputs(spec: GateSpec, perm: Sequence[int]) -> GateSpec:
    """Route output slot ``i`` to slot ``perm[i]``."""
    perm = tuple(perm)
    if sorted(perm) != list(range(spec.arity)):
        raise GateError(f"{perm} is not a permutation of {spec.arity} slots")
    dims = [0] * spec.arity
    for i, p in enumerate(perm):
        dims[p] = spec.output_dims[i]
    if tuple(dims) != spec.input_dims:
        raise GateError("rewiring would change slot dimensions")

    def route(y: Basis) -> Basis:
        out = [0] * len(y)
        for i, p in enumerate(perm):
            out[p] = y[i]
        return tuple(out)

    truth = {x: route(y) for x, y in spec.truth.items()}
    return GateSpec(f"wired({spec.name})", spec.input_dims, tuple(dims), truth,
                    spec.ancilla_modes)


_SPEC_RE = re.compile(r"^([a-z]+)(?::(.*))?$")


def parse_gate_spec(text: str) -> GateSpec:
    """Parse ``cx:2,3``, ``ccx:3``, ``cswap``, ``swap:3`` or ``teleport:2``."""
    text = text.strip()
    m = _SPEC_RE.match(text.lower())
    if not m:
        raise GateSpecParseError(text, "expected name[:dims]")
    name, arg = m.group(1), m.group(2)
    args: list[int] = []
    if arg is not None:
        for tok in arg.split(","):
            tok = tok.strip()
            if not tok.isdigit() or int(tok) < 2:
                raise GateSpecParseError(tok, "dimensions are integers >= 2")
            args.append(int(tok))
    nargs = {"swap": (0, 1), "teleport": (0, 1), "identity": (0, 1), "cx": (0, 2),
             "cnot": (0, 2), "ccx": (0, 1), "toffoli": (0, 1), "cswap": (0,),
             "fredkin": (0,)}
    if name not in nargs:
        raise GateSpecParseError(name, f"unknown gate (known: {', '.join(nargs)})")
    if len(args) not in nargs[name]:
        raise GateSpecParseError(arg or name, f"{name} takes {max(nargs[name])} dimension(s)")
    if name == "swap":
        return swap(*args)
    if name in ("teleport", "identity"):
        return identity(*args)
    if name in ("cx", "cnot"):
        return cx(*args)
    if name in ("ccx", "toffoli"):
        return ccx(*args)
    return cswap()


@dataclass(frozen=True)
class TargetState:
    ket: Ket
    layout: dict[str, tuple[int, ...]]
    spec: GateSpec | None = None


def standard_layout(spec: GateSpec, n_ancillas: int | None = None) -> dict[str, tuple[int, ...]]:
    k = spec.arity
    na = len(spec.ancilla_modes) if n_ancillas is None else n_ancillas
    return {"inputs": tuple(range(k)), "outputs": tuple(range(k, 2 * k)),
            "ancillas": tuple(range(2 * k, 2 * k + na))}


def layout_of(g: Graph) -> dict[str, tuple[int, ...]]:
    return {"inputs": tuple(g.ids_with_role(INPUT)),
            "outputs": tuple(g.ids_with_role(OUTPUT)),
            "ancillas": tuple(g.ids_with_role(ANCILLA))}


def spec_for_graph(spec: GateSpec, g: Graph) -> GateSpec:
    """Take the ancilla count and heralding modes from the graph's roles."""
    modes = [g.vertices[a].fixed_mode for a in g.ancillas]
    return spec.with_ancillas(len(modes), modes)


def check_compatible(spec: GateSpec, g: Graph) -> None:
    ins, outs = g.inputs, g.outputs
    if len(ins) != spec.arity or len(outs) != spec.arity:
        raise LayoutError(f"{spec.name} needs {spec.arity} inputs/outputs, graph has "
                          f"{len(ins)}/{len(outs)}")
    for slot, (i, o) in enumerate(zip(ins, outs)):
        if g.vertices[i].dim != spec.input_dims[slot] or g.vertices[o].dim != spec.output_dims[slot]:
            raise LayoutError(f"slot {slot}: graph dims ({g.vertices[i].dim}, "
                              f"{g.vertices[o].dim}) do not match {spec.name} "
                              f"dim {spec.input_dims[slot]}")


def build_target(spec: GateSpec, layout: dict[str, Sequence[int]] | None = None,
                 dims: Sequence[int] | None = None) -> TargetState:
    """Normalized Choi state of ``spec`` on the given vertex layout.

    ``dims`` are the per-vertex dimensions of the whole graph; by default
    inputs/outputs take the gate dims and ancillas dimension 2 (or enough
    for their fixed mode).
    """
    layout = {k: tuple(v) for k, v in (layout or standard_layout(spec)).items()}
    ins, outs, ancs = layout["inputs"], layout["outputs"], layout.get("ancillas", ())
    if len(ins) != spec.arity or len(outs) != spec.arity:
        raise LayoutError(f"layout has {len(ins)} inputs / {len(outs)} outputs, "
                          f"{spec.name} needs {spec.arity}")
    if len(ancs) != len(spec.ancilla_modes):
        raise LayoutError(f"layout has {len(ancs)} ancilla slots, spec fixes "
                          f"{len(spec.ancilla_modes)} modes")
    slots = list(ins) + list(outs) + list(ancs)
    n = len(slots)
    if sorted(slots) != list(range(n)):
        raise LayoutError(f"layout slots {slots} are not a permutation of 0..{n - 1}")
    if dims is None:
        vdims = [0] * n
        for i, d in zip(ins, spec.input_dims):
            vdims[i] = d
        for o, d in zip(outs, spec.output_dims):
            vdims[o] = d
        for a, m in zip(ancs, spec.ancilla_modes):
            vdims[a] = max(2, m + 1)
        dims = vdims
    dims = tuple(dims)
    if len(dims) != n:
        raise LayoutError(f"{len(dims)} dims for {n} vertices")
    amp = 1 / math.sqrt(spec.size)
    terms = {}
    for x, y in spec.truth.items():
        key = [0] * n
        for i, v in zip(ins, x):
            key[i] = v
        for o, v in zip(outs, y):
            key[o] = v
        for a, m in zip(ancs, spec.ancilla_modes):
            key[a] = m
        terms[tuple(key)] = complex(amp)
    return TargetState(Ket(terms, dims), layout, spec)


def target_for_graph(spec: GateSpec, g: Graph) -> TargetState:
    check_compatible(spec, g)
    return build_target(spec_for_graph(spec, g), layout_of(g), g.dims)

"""Chain components and coset covers at finite cylinder resolution.

Points of the shift are replaced by centered windows of width
``2 * radius + 1``; the neighborhood ``V_t`` of the base window consists
of the windows agreeing with it on the central ``2 * t + 1`` symbols
(cylinders are exactly the clopen basis of the shift topology, so this
is faithful at each resolution).  A window is *chained* to the base
window when a sequence of windows inside the ground set connects them
with every consecutive quotient ``inverse(v) * w`` falling in ``V_t``.

The construction requires the ambient operation to be commutative, of
period two and medial, and the base window to absorb ``V_t`` under
multiplication; violations are reported as the failing hypothesis.
The resulting component is closed under the operation and its translates
tile the ground set into a compatible partition.
"""

from __future__ import annotations

from dataclasses import dataclass

from .qgshift import QuasigroupShift
from .quasigroup import has_period_two, is_commutative, is_medial
from .shifts import words


class HypothesisViolatedError(ValueError):
    def __init__(self, which: str, detail: str):
        self.which = which
        super().__init__(f"hypothesis {which} fails: {detail}")


Window = tuple[str, ...]


@dataclass(frozen=True)
class ChainInstance:
    """A quasigroup shift observed through centered windows of fixed radius."""

    ambient: QuasigroupShift
    radius: int
    base_window: Window
    ground: tuple[Window, ...]
    base_is_constant: bool

    @property
    def width(self) -> int:
        return 2 * self.radius + 1


def chain_instance(
    qs: QuasigroupShift, radius: int, ground: tuple[Window, ...] | None = None
) -> ChainInstance:
    """Set up the window-level chain construction.

    The base window repeats the base element when that is allowed,
    otherwise it is the least allowed window centered on it (recorded via
    ``base_is_constant``).  Checks, in order: commutativity (h1), period
    two (h2), absorption of each neighborhood by the base window (h3,
    equivalent at window level to idempotence of the base window's
    central symbols), mediality (h4).  The ground set defaults to every
    allowed window and must contain the base window and be closed under
    the componentwise operation.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    op = qs.op
    if not is_commutative(op):
        raise HypothesisViolatedError("h1", "operation is not commutative")
    if not has_period_two(op):
        raise HypothesisViolatedError("h2", "some left translation is not an involution")
    if not is_medial(op):
        raise HypothesisViolatedError("h4", "operation is not medial")
    width = 2 * radius + 1
    e = qs.base.element
    constant = (e,) * width
    all_windows = tuple(words(qs.shift, width))
    if qs.shift.allows(constant):
        base = constant
        base_is_constant = True
    else:
        centered = [w for w in all_windows if w[radius] == e]
        if not centered:
            raise ValueError(f"no allowed window has {e!r} at the center")
        base = centered[0]
        base_is_constant = False
    for i, s in enumerate(base):
        if op.mul(s, s) != s:
            raise HypothesisViolatedError(
                "h3",
                f"base window is not idempotent at offset {i - radius}: "
                f"{s!r} * {s!r} != {s!r}, so it does not absorb its neighborhoods",
            )
    if ground is None:
        ground = all_windows
    else:
        ground = tuple(sorted(set(ground)))
        if base not in ground:
            raise ValueError("ground set must contain the base window")
        gset = set(ground)
        for v in ground:
            for w in ground:
                if _mul(op, v, w) not in gset:
                    raise ValueError("ground set is not closed under the operation")
    return ChainInstance(qs, radius, base, ground, base_is_constant)


def _mul(op, v: Window, w: Window) -> Window:
    return tuple(op.mul(a, b) for a, b in zip(v, w))


def _left_inverse(ci: ChainInstance, w: Window) -> Window:
    qs = ci.ambient
    return tuple(qs.base.left_of(qs.op, s) for s in w)


def in_neighborhood(ci: ChainInstance, t: int, w: Window) -> bool:
    """Window agrees with the base window on the central ``2t + 1`` symbols."""
    r = ci.radius
    return w[r - t : r + t + 1] == ci.base_window[r - t : r + t + 1]


def chain_component(ci: ChainInstance, t: int) -> frozenset[Window]:
    """All ground windows chained to the base window at order ``t``.

    Computed as a fixed point: grow from the base window by adding any
    window ``w`` with ``inverse(v) * w`` in the ``t``-neighborhood for
    some already-reached ``v``.  The result is closed under the
    operation, equal to its own inverses, and shrinks as ``t`` grows;
    these facts are asserted.
    """
    if not 1 <= t <= ci.radius:
        raise ValueError("order must be between 1 and the radius")
    op = ci.ambient.op
    reached: set[Window] = {ci.base_window}
    frontier = [ci.base_window]
    remaining = set(ci.ground) - reached
    while frontier:
        new_frontier = []
        for w in sorted(remaining):
            for v in frontier:
                if in_neighborhood(ci, t, _mul(op, _left_inverse(ci, v), w)):
                    new_frontier.append(w)
                    break
        for w in new_frontier:
            reached.add(w)
            remaining.discard(w)
        frontier = new_frontier

    component = frozenset(reached)
    products = {_mul(op, v, w) for v in component for w in component}
    assert products == component, "chain component must be closed under the operation"
    assert {_left_inverse(ci, w) for w in component} == component
    return component


def coset_cover(ci: ChainInstance, component: frozenset[Window]) -> tuple[tuple[Window, ...], ...]:
    """Tile the ground set by the translates of a chain component.

    Raises :class:`~quasishift.quasigroup.NotAPartitionError` when two
    translates overlap without being equal (which signals a hypothesis
    failure upstream).  Blockwise products of the tiles are again tiles,
    and every tile has the component's size; both facts are asserted.
    """
    from .quasigroup import NotAPartitionError

    op = ci.ambient.op
    tiles: list[frozenset[Window]] = []
    for w in ci.ground:
        tile = frozenset(_mul(op, w, q) for q in component)
        for prev in tiles:
            if prev != tile and prev & tile:
                raise NotAPartitionError(
                    "translates of the chain component overlap without being equal"
                )
        if tile not in tiles:
            tiles.append(tile)
    covered = set().union(*tiles) if tiles else set()
    if covered != set(ci.ground):
        raise NotAPartitionError("translates do not cover the ground set")
    assert all(len(t) == len(component) for t in tiles)
    tile_set = set(tiles)
    for a in tiles:
        for b in tiles:
            prod = frozenset(_mul(op, v, w) for v in a for w in b)
            assert prod in tile_set, "tile products must be tiles"
    return tuple(sorted(tuple(sorted(t)) for t in tiles))

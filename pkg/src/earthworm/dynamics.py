"""Hole dynamics of the earthworm walk on the d-dimensional integer lattice.

The worm starts at the origin, which is the only hole. Each step it moves
to a uniformly random neighbor. If the line ahead of it (in the direction
of the step) contains no hole, the destination becomes a new hole;
otherwise the nearest hole strictly ahead is filled ("transferred" to the
destination, unless the destination is that hole itself, in which case
nothing changes). The hole count therefore increases by 0 or 1 per step.

States carry an indexed hole set (`LineIndex`) supporting O(log) nearest-
hole-ahead queries per step, and optionally a second index over visited
sites for tan-point statistics.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right, insort
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Optional, Sequence

import numpy as np

from .rng import Xoshiro256PP

Site = tuple  # d signed integer coordinates

# Directions are packed as codes 0..2d-1: code = 2*axis + (0 for +, 1 for -).
# For d=2 that is 0=right(+x), 1=left(-x), 2=up(+y), 3=down(-y); this
# encoding is fixed so runs reproduce bit-exactly everywhere.


@dataclass(frozen=True)
class Direction:
    axis: int
    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"direction sign must be +1 or -1, got {self.sign}")
        if self.axis < 0:
            raise ValueError(f"direction axis must be >= 0, got {self.axis}")

    @property
    def code(self) -> int:
        return 2 * self.axis + (0 if self.sign > 0 else 1)

    @classmethod
    def from_code(cls, code: int) -> "Direction":
        return cls(axis=code >> 1, sign=1 if (code & 1) == 0 else -1)


RIGHT = Direction(0, 1)
LEFT = Direction(0, -1)
UP = Direction(1, 1)
DOWN = Direction(1, -1)

_NAMED_2D = {"right": RIGHT, "left": LEFT, "up": UP, "down": DOWN}


def direction_from_name(name: str, dim: int) -> Direction:
    """Parse 'right'/'left'/'up'/'down' (d=2) or a numeric code valid for dim."""
    token = name.strip().lower()
    if token in _NAMED_2D:
        d = _NAMED_2D[token]
        if d.axis >= dim:
            raise ValueError(f"direction {token!r} needs dim >= {d.axis + 1}")
        return d
    try:
        code = int(token)
    except ValueError:
        raise ValueError(f"unknown direction {name!r}") from None
    if not 0 <= code < 2 * dim:
        raise ValueError(f"direction code {code} out of range for dim={dim}")
    return Direction.from_code(code)


class StepEvent(Enum):
    CREATED = "created"
    TRANSFERRED = "transferred"
    NO_CHANGE = "no_change"


@dataclass(frozen=True)
class StepOutcome:
    """Record of one step: what moved where and what happened to the holes."""

    direction: Direction
    event: StepEvent
    transferred_from: Optional[Site]
    new_position: Site
    hole_count_after: int
    tan_point: Optional[bool]  # None when visit tracking is off


class TrackingDisabledError(RuntimeError):
    """Raised when a tan-point query needs visit tracking that is off."""


class LineIndex:
    """A set of lattice sites with per-axis sorted line indexes.

    ``members`` is the canonical plain set. For each axis ``a`` the sites
    are additionally grouped into lines (sites differing only in coordinate
    ``a``), each line holding its axis-``a`` coordinates in sorted order,
    so nearest-neighbor-along-a-line queries are one bisect. All d+1 views
    describe the same point set; `check_consistent` verifies that.

    Line keys are the site's other coordinates: a bare int for d=2, a tuple
    for d>=3 (the d=2 case is the hot one and int keys hash faster).
    """

    __slots__ = ("dim", "members", "_lines")

    def __init__(self, dim: int, sites: Sequence[Site] = ()):
        if dim < 2:
            raise ValueError(f"dimension must be >= 2, got {dim}")
        self.dim = dim
        self.members: set = set()
        self._lines: list[dict] = [{} for _ in range(dim)]
        for site in sites:
            self.add(site)

    def _key(self, site: Site, axis: int):
        if self.dim == 2:
            return site[1 - axis]
        return site[:axis] + site[axis + 1 :]

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, site: Site) -> bool:
        return site in self.members

    def add(self, site: Site) -> None:
        """Insert a site; no-op if already present."""
        if site in self.members:
            return
        self.members.add(site)
        for axis in range(self.dim):
            key = self._key(site, axis)
            line = self._lines[axis].get(key)
            if line is None:
                self._lines[axis][key] = [site[axis]]
            else:
                insort(line, site[axis])

    def remove(self, site: Site) -> None:
        """Remove a site; KeyError if absent. Empty lines are dropped."""
        if site not in self.members:
            raise KeyError(site)
        self.members.discard(site)
        for axis in range(self.dim):
            key = self._key(site, axis)
            line = self._lines[axis][key]
            if len(line) == 1:
                del self._lines[axis][key]
            else:
                del line[bisect_left(line, site[axis])]

    def nearest_ahead(self, pos: Site, axis: int, sign: int) -> Optional[Site]:
        """Nearest member strictly beyond ``pos`` along ``axis`` in ``sign``.

        ``pos`` itself is never returned and need not be a member.
        """
        line = self._lines[axis].get(self._key(pos, axis))
        if line is None:
            return None
        c = pos[axis]
        if sign > 0:
            i = bisect_right(line, c)
            if i == len(line):
                return None
            found = line[i]
        else:
            i = bisect_left(line, c) - 1
            if i < 0:
                return None
            found = line[i]
        return pos[:axis] + (found,) + pos[axis + 1 :]

    def sites(self) -> Iterator[Site]:
        """All member sites, in no particular order."""
        return iter(self.members)

    def as_set(self) -> set:
        return set(self.members)

    def snapshot_sorted(self) -> list[Site]:
        return sorted(self.members)

    def check_consistent(self) -> None:
        """Verify the canonical set and all d per-axis views agree.

        Checks: every axis view reconstructs exactly ``members``, lines are
        strictly sorted, no empty lines are retained. Raises AssertionError
        on the first discrepancy.
        """
        for axis in range(self.dim):
            seen = set()
            for key, line in self._lines[axis].items():
                if not line:
                    raise AssertionError(f"axis {axis}: empty line retained at key {key!r}")
                if any(line[i] >= line[i + 1] for i in range(len(line) - 1)):
                    raise AssertionError(f"axis {axis}: line at key {key!r} not strictly sorted")
                for c in line:
                    if self.dim == 2:
                        site = (c, key) if axis == 0 else (key, c)
                    else:
                        site = key[:axis] + (c,) + key[axis:]
                    seen.add(site)
            if seen != self.members:
                raise AssertionError(
                    f"axis {axis} view disagrees with canonical set: "
                    f"{len(seen ^ self.members)} sites differ"
                )


@dataclass
class RunSummary:
    steps: int
    s_n: int
    created_total: int
    tan_total: Optional[int]
    series: Optional[list[tuple[int, int]]]  # (step_count, hole count) samples


class WormState:
    """Full simulation state: position, hole index, counters, RNG.

    ``rng`` may be None for externally-driven worms (coupling): such states
    accept `apply_move` but cannot `step`.
    """

    __slots__ = (
        "dim",
        "position",
        "step_count",
        "holes",
        "visits",
        "rng",
        "created_total",
        "tan_total",
    )

    def __init__(
        self,
        dim: int,
        position: Site,
        step_count: int,
        holes: LineIndex,
        visits: Optional[LineIndex],
        rng: Optional[Xoshiro256PP],
        created_total: int,
        tan_total: Optional[int],
    ):
        self.dim = dim
        self.position = position
        self.step_count = step_count
        self.holes = holes
        self.visits = visits
        self.rng = rng
        self.created_total = created_total
        self.tan_total = tan_total

    @property
    def hole_count(self) -> int:
        return len(self.holes)

    @property
    def track_visits(self) -> bool:
        return self.visits is not None


def new_state(dim: int, seed: int, track_visits: bool = False) -> WormState:
    """Fresh worm at the origin: one hole there, generator seeded from ``seed``."""
    if dim < 2:
        raise ValueError(f"dimension must be >= 2, got {dim} (d=1 dynamics are degenerate)")
    origin = (0,) * dim
    return WormState(
        dim=dim,
        position=origin,
        step_count=0,
        holes=LineIndex(dim, [origin]),
        visits=LineIndex(dim, [origin]) if track_visits else None,
        rng=Xoshiro256PP.from_seed(seed),
        created_total=1,
        tan_total=0 if track_visits else None,
    )


def nearest_hole_ahead(holes: LineIndex, pos: Site, direction: Direction) -> Optional[Site]:
    """The hole strictly beyond ``pos`` on its line along ``direction``, if any."""
    return holes.nearest_ahead(pos, direction.axis, direction.sign)


def is_tan_point(state: WormState, direction: Direction) -> bool:
    """True iff no visited site lies strictly ahead of the worm along ``direction``.

    Evaluated against the current visit set, i.e. before any move.
    """
    if state.visits is None:
        raise TrackingDisabledError("tan-point queries require track_visits=True")
    return state.visits.nearest_ahead(state.position, direction.axis, direction.sign) is None


def apply_move(state: WormState, direction: Direction) -> StepOutcome:
    """Advance the worm one step in a given direction and update the holes.

    Unified transition: find the nearest hole strictly ahead (before
    moving); if there is none the destination becomes a new hole, if it is
    the destination itself nothing changes, otherwise it is transferred to
    the destination.
    """
    axis, sign = direction.axis, direction.sign
    pos = state.position
    new_pos = pos[:axis] + (pos[axis] + sign,) + pos[axis + 1 :]
    holes = state.holes
    q = holes.nearest_ahead(pos, axis, sign)

    tan = None
    if state.visits is not None:
        tan = state.visits.nearest_ahead(pos, axis, sign) is None
        if tan and q is not None:
            # Holes are a subset of visited sites, so a tan point can never
            # have a hole ahead; reaching this means the indexes diverged.
            raise RuntimeError(
                f"invariant violation at step {state.step_count}: "
                f"tan point along {direction} but hole {q} ahead"
            )
        if tan:
            state.tan_total += 1

    if q is None:
        holes.add(new_pos)
        event = StepEvent.CREATED
        transferred_from = None
        state.created_total += 1
    elif q == new_pos:
        event = StepEvent.NO_CHANGE
        transferred_from = None
    else:
        holes.remove(q)
        holes.add(new_pos)
        event = StepEvent.TRANSFERRED
        transferred_from = q

    state.position = new_pos
    state.step_count += 1
    if state.visits is not None:
        state.visits.add(new_pos)
    return StepOutcome(
        direction=direction,
        event=event,
        transferred_from=transferred_from,
        new_position=new_pos,
        hole_count_after=len(holes),
        tan_point=tan,
    )


def step(state: WormState) -> StepOutcome:
    """Draw a uniform direction from the state's generator, then move."""
    if state.rng is None:
        raise ValueError("state has no generator; drive it with apply_move instead")
    code = state.rng.next_direction(state.dim)
    return apply_move(state, Direction.from_code(code))


def holes_snapshot(state: WormState) -> list[Site]:
    """Exact hole set, lexicographically sorted."""
    return state.holes.snapshot_sorted()


_CHUNK = 1 << 16


def run(state: WormState, steps: int, record_every: Optional[int] = None) -> RunSummary:
    """Apply `step` exactly ``steps`` times (optimized; identical results).

    Directions are consumed from the state's generator exactly as repeated
    `step` calls would, so interrupt/resume and replay are bit-exact. The
    optional series samples (step_count, hole count) at every multiple of
    ``record_every`` in [current step_count, current + steps].

    Memory stays proportional to the index sizes: directions are drawn in
    fixed-size chunks, never materialized for the whole run.
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    if record_every is not None and record_every < 1:
        raise ValueError(f"record_every must be >= 1, got {record_every}")
    if state.rng is None:
        raise ValueError("state has no generator; drive it with apply_move instead")

    series: Optional[list[tuple[int, int]]] = [] if record_every else None
    if series is not None and state.step_count % record_every == 0:
        series.append((state.step_count, len(state.holes)))

    if state.dim == 2:
        _run_d2(state, steps, record_every, series)
    else:
        _run_generic(state, steps, record_every, series)

    return RunSummary(
        steps=steps,
        s_n=len(state.holes),
        created_total=state.created_total,
        tan_total=state.tan_total,
        series=series,
    )


def _run_d2(state, steps, record_every, series):
    """d=2 hot loop: direct index manipulation, chunked direction draws."""
    rows, cols = state.holes._lines  # y -> sorted xs, x -> sorted ys
    hmembers = state.holes.members
    track = state.visits is not None
    if track:
        vrows, vcols = state.visits._lines
        vmembers = state.visits.members
        tan_total = state.tan_total
    x, y = state.position
    count = len(hmembers)
    created = state.created_total
    rng = state.rng
    k = state.step_count

    buf = np.empty(_CHUNK, dtype=np.uint64)
    three = np.uint64(3)
    remaining = steps
    while remaining > 0:
        m = _CHUNK if remaining >= _CHUNK else remaining
        if record_every is not None:
            m = min(m, record_every - k % record_every)
        rng.fill(buf[:m])
        dirs = (buf[:m] & three).tolist()
        remaining -= m
        k += m
        for d in dirs:
            if d < 2:
                line = rows[y]
                j = bisect_left(line, x)
                if d == 0:
                    nx = x + 1
                    i = j + 1
                    q = line[i] if i < len(line) else None
                else:
                    nx = x - 1
                    i = j - 1
                    q = line[i] if i >= 0 else None
                if track:
                    vline = vrows[y]
                    jv = bisect_left(vline, x)
                    if (jv + 1 == len(vline)) if d == 0 else (jv == 0):
                        tan_total += 1
                        if q is not None:
                            raise RuntimeError(
                                "invariant violation: tan point with hole ahead"
                            )
                if q is None:
                    if d == 0:
                        line.append(nx)
                    else:
                        line.insert(0, nx)
                    c = cols.get(nx)
                    if c is None:
                        cols[nx] = [y]
                    else:
                        insort(c, y)
                    hmembers.add((nx, y))
                    count += 1
                    created += 1
                elif q != nx:
                    line[i] = nx
                    cq = cols[q]
                    if len(cq) == 1:
                        del cols[q]
                    else:
                        del cq[bisect_left(cq, y)]
                    c = cols.get(nx)
                    if c is None:
                        cols[nx] = [y]
                    else:
                        insort(c, y)
                    hmembers.discard((q, y))
                    hmembers.add((nx, y))
                x = nx
                if track:
                    iv = bisect_left(vline, nx)
                    if iv == len(vline) or vline[iv] != nx:
                        vline.insert(iv, nx)
                        vc = vcols.get(nx)
                        if vc is None:
                            vcols[nx] = [y]
                        else:
                            insort(vc, y)
                        vmembers.add((nx, y))
            else:
                line = cols[x]
                j = bisect_left(line, y)
                if d == 2:
                    ny = y + 1
                    i = j + 1
                    q = line[i] if i < len(line) else None
                else:
                    ny = y - 1
                    i = j - 1
                    q = line[i] if i >= 0 else None
                if track:
                    vline = vcols[x]
                    jv = bisect_left(vline, y)
                    if (jv + 1 == len(vline)) if d == 2 else (jv == 0):
                        tan_total += 1
                        if q is not None:
                            raise RuntimeError(
                                "invariant violation: tan point with hole ahead"
                            )
                if q is None:
                    if d == 2:
                        line.append(ny)
                    else:
                        line.insert(0, ny)
                    r = rows.get(ny)
                    if r is None:
                        rows[ny] = [x]
                    else:
                        insort(r, x)
                    hmembers.add((x, ny))
                    count += 1
                    created += 1
                elif q != ny:
                    line[i] = ny
                    rq = rows[q]
                    if len(rq) == 1:
                        del rows[q]
                    else:
                        del rq[bisect_left(rq, x)]
                    r = rows.get(ny)
                    if r is None:
                        rows[ny] = [x]
                    else:
                        insort(r, x)
                    hmembers.discard((x, q))
                    hmembers.add((x, ny))
                y = ny
                if track:
                    iv = bisect_left(vline, ny)
                    if iv == len(vline) or vline[iv] != ny:
                        vline.insert(iv, ny)
                        vr = vrows.get(ny)
                        if vr is None:
                            vrows[ny] = [x]
                        else:
                            insort(vr, x)
                        vmembers.add((x, ny))
        if series is not None and k % record_every == 0:
            series.append((k, count))

    state.position = (x, y)
    state.step_count = k
    state.created_total = created
    if track:
        state.tan_total = tan_total
    if count != len(hmembers):
        raise RuntimeError(
            f"hole index drift: counted {count} events but canonical set has {len(hmembers)}"
        )


def _run_generic(state, steps, record_every, series):
    """Any-d loop; same transition as apply_move with per-call draws."""
    holes = state.holes
    visits = state.visits
    rng = state.rng
    dim = state.dim
    pos = state.position
    k = state.step_count

    for _ in range(steps):
        code = rng.next_direction(dim)
        axis = code >> 1
        sign = 1 if (code & 1) == 0 else -1
        q = holes.nearest_ahead(pos, axis, sign)
        if visits is not None:
            if visits.nearest_ahead(pos, axis, sign) is None:
                state.tan_total += 1
                if q is not None:
                    raise RuntimeError("invariant violation: tan point with hole ahead")
        new_pos = pos[:axis] + (pos[axis] + sign,) + pos[axis + 1 :]
        if q is None:
            holes.add(new_pos)
            state.created_total += 1
        elif q != new_pos:
            holes.remove(q)
            holes.add(new_pos)
        pos = new_pos
        if visits is not None:
            visits.add(new_pos)
        k += 1
        if series is not None and k % record_every == 0:
            series.append((k, len(holes)))

    state.position = pos
    state.step_count = k

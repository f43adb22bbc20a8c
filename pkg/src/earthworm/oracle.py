"""Deliberately naive twin of the dynamics, used as an equivalence oracle.

Holes live in a plain set; the nearest hole ahead is found by filtering
the whole set to the line ahead and minimizing distance. Obviously correct
and unconditionally terminating, at O(S_n) per step - desk scale only.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .dynamics import (
    Direction,
    Site,
    StepEvent,
    StepOutcome,
    apply_move,
    new_state,
)
from .rng import Xoshiro256PP


@dataclass
class NaiveState:
    dim: int
    position: Site
    step_count: int
    holes: set = field(default_factory=set)
    visited: set = field(default_factory=set)
    track_visits: bool = False
    created_total: int = 1
    tan_total: int = 0

    @property
    def hole_count(self) -> int:
        return len(self.holes)


def naive_new_state(dim: int, track_visits: bool = False) -> NaiveState:
    if dim < 2:
        raise ValueError(f"dimension must be >= 2, got {dim}")
    origin = (0,) * dim
    return NaiveState(
        dim=dim,
        position=origin,
        step_count=0,
        holes={origin},
        visited={origin},
        track_visits=track_visits,
    )


def _nearest_in_line(sites: set, pos: Site, axis: int, sign: int) -> Optional[Site]:
    """Filter the whole set to the line ahead of ``pos``; minimize distance."""
    c = pos[axis]
    if len(pos) == 2:
        o = 1 - axis
        po = pos[o]
        if sign > 0:
            coord = min((s[axis] for s in sites if s[o] == po and s[axis] > c), default=None)
        else:
            coord = max((s[axis] for s in sites if s[o] == po and s[axis] < c), default=None)
    else:
        rest = pos[:axis] + pos[axis + 1 :]
        if sign > 0:
            coord = min(
                (s[axis] for s in sites if s[axis] > c and s[:axis] + s[axis + 1 :] == rest),
                default=None,
            )
        else:
            coord = max(
                (s[axis] for s in sites if s[axis] < c and s[:axis] + s[axis + 1 :] == rest),
                default=None,
            )
    if coord is None:
        return None
    return pos[:axis] + (coord,) + pos[axis + 1 :]


def naive_apply_move(state: NaiveState, direction: Direction) -> StepOutcome:
    """Same contract as dynamics.apply_move, by exhaustive search."""
    axis, sign = direction.axis, direction.sign
    pos = state.position
    new_pos = pos[:axis] + (pos[axis] + sign,) + pos[axis + 1 :]
    q = _nearest_in_line(state.holes, pos, axis, sign)

    tan = None
    if state.track_visits:
        tan = _nearest_in_line(state.visited, pos, axis, sign) is None
        if tan:
            state.tan_total += 1

    if q is None:
        state.holes.add(new_pos)
        state.created_total += 1
        event = StepEvent.CREATED
        transferred_from = None
    elif q == new_pos:
        event = StepEvent.NO_CHANGE
        transferred_from = None
    else:
        state.holes.discard(q)
        state.holes.add(new_pos)
        event = StepEvent.TRANSFERRED
        transferred_from = q

    state.position = new_pos
    state.step_count += 1
    state.visited.add(new_pos)
    return StepOutcome(
        direction=direction,
        event=event,
        transferred_from=transferred_from,
        new_position=new_pos,
        hole_count_after=len(state.holes),
        tan_point=tan,
    )


@dataclass
class EquivalenceReport:
    ok: bool
    seed: int
    dim: int
    steps_run: int
    divergence_step: Optional[int] = None
    detail: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "seed": self.seed,
            "dim": self.dim,
            "steps_run": self.steps_run,
            "divergence_step": self.divergence_step,
            "detail": self.detail,
        }


def replay_equivalence(
    seed: int,
    steps: int,
    dim: int,
    track_visits: bool = False,
    consistency_every: int = 250,
    _corrupt=None,
) -> EquivalenceReport:
    """Drive the indexed engine and the naive oracle with one direction sequence.

    The sequence is drawn once from the run-seed contract. After every step
    the two StepOutcomes and the two full hole sets must agree exactly; the
    indexed engine's cross-axis consistency is additionally verified every
    ``consistency_every`` steps and at the end.

    ``_corrupt`` is a testing hook: a callable applied to the indexed
    engine's outcome before comparison, used to prove divergences are
    caught.
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    rng = Xoshiro256PP.from_seed(seed)
    codes = rng.direction_block(dim, steps)

    fast = new_state(dim, seed=seed, track_visits=track_visits)
    naive = naive_new_state(dim, track_visits=track_visits)

    def fail(k: int, detail: str) -> EquivalenceReport:
        return EquivalenceReport(
            ok=False, seed=seed, dim=dim, steps_run=k, divergence_step=k, detail=detail
        )

    for k, code in enumerate(codes, start=1):
        direction = Direction.from_code(code)
        out_fast = apply_move(fast, direction)
        if _corrupt is not None:
            out_fast = _corrupt(fast, out_fast)
        out_naive = naive_apply_move(naive, direction)
        if out_fast != out_naive:
            return fail(k, f"outcome mismatch: indexed={out_fast} naive={out_naive}")
        if fast.holes.members != naive.holes:
            extra = sorted(fast.holes.members - naive.holes)[:3]
            missing = sorted(naive.holes - fast.holes.members)[:3]
            return fail(k, f"hole sets differ: indexed-only={extra} naive-only={missing}")
        if k % consistency_every == 0:
            fast.holes.check_consistent()

    fast.holes.check_consistent()
    if track_visits:
        fast.visits.check_consistent()
        if fast.visits.as_set() != naive.visited:
            return fail(steps, "visit sets differ at end")
    return EquivalenceReport(ok=True, seed=seed, dim=dim, steps_run=steps)

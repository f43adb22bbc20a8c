"""Versioned JSON checkpoints for worm states.

Self-describing, diffable, portable: generator state is hex-encoded, hole
and visit sets are lexicographically sorted coordinate arrays. A loaded
state continues bit-identically to the uninterrupted run.
"""

from __future__ import annotations

import json
import os
from typing import Optional

from .dynamics import LineIndex, WormState
from .rng import Xoshiro256PP

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """A checkpoint file could not be loaded; the message names the field."""


def atomic_write_text(path: str, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def state_to_dict(state: WormState) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "kind": "worm-state",
        "dim": state.dim,
        "position": list(state.position),
        "step_count": state.step_count,
        "hole_count": len(state.holes),
        "created_total": state.created_total,
        "tan_total": state.tan_total,
        "rng": state.rng.state_hex() if state.rng is not None else None,
        "holes": [list(s) for s in state.holes.snapshot_sorted()],
        "visits": (
            [list(s) for s in state.visits.snapshot_sorted()]
            if state.visits is not None
            else None
        ),
    }


def _require(payload: dict, field: str):
    if field not in payload:
        raise CheckpointError(f"checkpoint missing field {field!r}")
    return payload[field]


def state_from_dict(payload: dict) -> WormState:
    version = _require(payload, "format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported format_version {version!r} (expected {FORMAT_VERSION})")
    kind = _require(payload, "kind")
    if kind != "worm-state":
        raise CheckpointError(f"expected kind 'worm-state', got {kind!r}")
    dim = _require(payload, "dim")
    if not isinstance(dim, int) or dim < 2:
        raise CheckpointError(f"invalid dim {dim!r}")
    position = tuple(_require(payload, "position"))
    if len(position) != dim:
        raise CheckpointError(f"position has {len(position)} coords, dim is {dim}")
    holes_raw = _require(payload, "holes")
    holes = LineIndex(dim, [tuple(s) for s in holes_raw])
    if len(holes) != _require(payload, "hole_count"):
        raise CheckpointError("hole_count does not match the holes array")
    if position not in holes:
        raise CheckpointError("position is not a hole")
    visits_raw = _require(payload, "visits")
    visits = None
    if visits_raw is not None:
        visits = LineIndex(dim, [tuple(s) for s in visits_raw])
    rng_hex = _require(payload, "rng")
    rng = None
    if rng_hex is not None:
        try:
            rng = Xoshiro256PP.from_state_hex(rng_hex)
        except ValueError as exc:
            raise CheckpointError(f"invalid rng state: {exc}") from exc
    tan_total = _require(payload, "tan_total")
    if (tan_total is None) != (visits is None):
        raise CheckpointError("tan_total and visits must be tracked together")
    return WormState(
        dim=dim,
        position=position,
        step_count=_require(payload, "step_count"),
        holes=holes,
        visits=visits,
        rng=rng,
        created_total=_require(payload, "created_total"),
        tan_total=tan_total,
    )


def save_state(state: WormState, path: str) -> None:
    atomic_write_text(path, json.dumps(state_to_dict(state), sort_keys=True) + "\n")


def load_state(path: str) -> WormState:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise CheckpointError("checkpoint root must be a JSON object")
    return state_from_dict(payload)


def checkpoint_roundtrip(state: WormState, path: str) -> WormState:
    """Save then load; the result continues bit-identically to ``state``."""
    save_state(state, path)
    return load_state(path)

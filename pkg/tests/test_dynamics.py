import pytest

from earthworm.dynamics import (
    DOWN,
    LEFT,
    RIGHT,
    UP,
    Direction,
    LineIndex,
    StepEvent,
    TrackingDisabledError,
    apply_move,
    direction_from_name,
    holes_snapshot,
    is_tan_point,
    nearest_hole_ahead,
    new_state,
    run,
    step,
)
from earthworm.rng import Xoshiro256PP


def drive(state, names):
    outs = []
    for name in names:
        outs.append(apply_move(state, direction_from_name(name, state.dim)))
    return outs


class TestDirectionEncoding:
    def test_canonical_codes_d2(self):
        assert [RIGHT.code, LEFT.code, UP.code, DOWN.code] == [0, 1, 2, 3]

    def test_from_code_roundtrip(self):
        for code in range(8):
            assert Direction.from_code(code).code == code

    def test_bad_sign_rejected(self):
        with pytest.raises(ValueError):
            Direction(0, 2)

    def test_direction_from_name(self):
        assert direction_from_name("up", 2) == UP
        assert direction_from_name("3", 2) == DOWN
        assert direction_from_name("5", 3) == Direction(2, -1)
        with pytest.raises(ValueError):
            direction_from_name("up", 1)  # axis 1 needs dim >= 2 but dim=1 invalid anyway
        with pytest.raises(ValueError):
            direction_from_name("sideways", 2)
        with pytest.raises(ValueError):
            direction_from_name("6", 3)


class TestNewState:
    def test_initial_condition_d2(self):
        st = new_state(2, seed=123)
        assert st.hole_count == 1
        assert holes_snapshot(st) == [(0, 0)]
        assert st.position == (0, 0)
        assert st.step_count == 0
        assert st.visits is None
        assert st.tan_total is None

    def test_initial_condition_d3_tracked(self):
        st = new_state(3, seed=0, track_visits=True)
        assert st.hole_count == 1
        assert st.visits.as_set() == {(0, 0, 0)}
        assert st.tan_total == 0

    def test_dim_one_rejected(self):
        with pytest.raises(ValueError):
            new_state(1, seed=0)

    def test_dim_zero_rejected(self):
        with pytest.raises(ValueError):
            new_state(0, seed=0)


class TestNearestHoleAhead:
    def setup_method(self):
        self.holes = LineIndex(2, [(0, 0), (3, 0)])

    def test_smallest_beyond(self):
        assert nearest_hole_ahead(self.holes, (1, 0), RIGHT) == (3, 0)

    def test_nothing_strictly_ahead(self):
        assert nearest_hole_ahead(self.holes, (3, 0), RIGHT) is None

    def test_largest_below(self):
        assert nearest_hole_ahead(self.holes, (3, 0), LEFT) == (0, 0)

    def test_pos_itself_never_returned(self):
        assert nearest_hole_ahead(self.holes, (0, 0), RIGHT) == (3, 0)
        assert nearest_hole_ahead(self.holes, (0, 0), LEFT) is None

    def test_other_lines_ignored(self):
        holes = LineIndex(2, [(5, 1), (0, 0)])
        assert nearest_hole_ahead(holes, (0, 0), RIGHT) is None
        assert nearest_hole_ahead(holes, (0, 1), RIGHT) == (5, 1)


class TestApplyMove:
    def test_first_move_creates(self):
        st = new_state(2, seed=0)
        out = apply_move(st, RIGHT)
        assert out.event is StepEvent.CREATED
        assert out.new_position == (1, 0)
        assert out.hole_count_after == 2
        assert st.hole_count == 2

    def test_right_left_is_no_change(self):
        st = new_state(2, seed=0)
        outs = drive(st, ["right", "left"])
        assert outs[1].event is StepEvent.NO_CHANGE
        assert st.hole_count == 2
        assert st.position == (0, 0)

    def test_five_move_transfer_trace(self):
        st = new_state(2, seed=0)
        outs = drive(st, ["up", "right", "right", "down"])
        assert all(o.event is StepEvent.CREATED for o in outs)
        assert st.holes.as_set() == {(0, 0), (0, 1), (1, 1), (2, 1), (2, 0)}
        assert st.hole_count == 5
        out = drive(st, ["left"])[0]
        assert out.event is StepEvent.TRANSFERRED
        assert out.transferred_from == (0, 0)
        assert st.holes.as_set() == {(1, 0), (0, 1), (1, 1), (2, 1), (2, 0)}
        assert st.hole_count == 5
        assert holes_snapshot(st) == [(0, 1), (1, 0), (1, 1), (2, 0), (2, 1)]

    def test_transferred_from_was_hole_and_is_gone(self):
        st = new_state(2, seed=99)
        prev_holes = st.holes.as_set()
        for _ in range(500):
            out = step(st)
            if out.event is StepEvent.TRANSFERRED:
                assert out.transferred_from in prev_holes
                assert out.transferred_from not in st.holes
                assert out.transferred_from != out.new_position
            prev_holes = st.holes.as_set()

    def test_position_is_always_a_hole(self):
        st = new_state(2, seed=5)
        for _ in range(300):
            step(st)
            assert st.position in st.holes

    def test_hole_count_increment_zero_or_one(self):
        st = new_state(2, seed=21)
        prev = st.hole_count
        for _ in range(500):
            out = step(st)
            assert out.hole_count_after - prev in (0, 1)
            assert (out.hole_count_after - prev == 1) == (out.event is StepEvent.CREATED)
            prev = out.hole_count_after


class TestStep:
    def test_first_step_always_creates(self):
        for seed in range(20):
            st = new_state(2, seed=seed)
            assert step(st).event is StepEvent.CREATED
            assert st.hole_count == 2

    def test_same_seed_same_outcomes(self):
        a = new_state(2, seed=77)
        b = new_state(2, seed=77)
        outs_a = [step(a) for _ in range(400)]
        outs_b = [step(b) for _ in range(400)]
        assert outs_a == outs_b

    def test_step_needs_rng(self):
        st = new_state(2, seed=0)
        st.rng = None
        with pytest.raises(ValueError):
            step(st)


class TestRun:
    def test_zero_steps(self):
        st = new_state(2, seed=3)
        summary = run(st, 0)
        assert summary.s_n == 1
        assert summary.steps == 0

    def test_negative_steps_rejected(self):
        with pytest.raises(ValueError):
            run(new_state(2, seed=3), -1)

    @pytest.mark.parametrize("dim,track", [(2, False), (2, True), (3, False), (3, True)])
    def test_run_matches_step_by_step(self, dim, track):
        fast = new_state(dim, seed=1312, track_visits=track)
        summary = run(fast, 3000)
        slow = new_state(dim, seed=1312, track_visits=track)
        for _ in range(3000):
            step(slow)
        assert summary.s_n == slow.hole_count
        assert fast.position == slow.position
        assert fast.step_count == slow.step_count == 3000
        assert fast.holes.as_set() == slow.holes.as_set()
        assert fast.rng.state_tuple() == slow.rng.state_tuple()
        assert fast.created_total == slow.created_total
        if track:
            assert fast.tan_total == slow.tan_total
            assert fast.visits.as_set() == slow.visits.as_set()

    @pytest.mark.parametrize("dim", [2, 3])
    def test_run_split_equals_straight(self, dim):
        a = new_state(dim, seed=4242)
        run(a, 2500)
        b = new_state(dim, seed=4242)
        run(b, 900)
        run(b, 1100)
        run(b, 500)
        assert a.holes.as_set() == b.holes.as_set()
        assert a.position == b.position
        assert a.rng.state_tuple() == b.rng.state_tuple()

    def test_series_sampled_at_multiples(self):
        st = new_state(2, seed=9)
        summary = run(st, 1000, record_every=250)
        assert [k for k, _ in summary.series] == [0, 250, 500, 750, 1000]
        assert summary.series[0] == (0, 1)
        assert summary.series[-1][1] == summary.s_n
        # series values match fresh partial runs
        for k, s in summary.series:
            st2 = new_state(2, seed=9)
            assert run(st2, k).s_n == s

    def test_series_respects_offset_runs(self):
        st = new_state(2, seed=9)
        run(st, 100)
        summary = run(st, 200, record_every=150)
        assert [k for k, _ in summary.series] == [150, 300]

    def test_summary_counters(self):
        st = new_state(2, seed=55, track_visits=True)
        summary = run(st, 2000)
        assert summary.s_n == st.hole_count == st.created_total == summary.created_total
        assert 1 <= summary.s_n <= 2001
        assert summary.tan_total == st.tan_total <= 2000


class TestTanPoints:
    def test_fresh_state_every_direction_is_tan(self):
        st = new_state(2, seed=0, track_visits=True)
        for d in (RIGHT, LEFT, UP, DOWN):
            assert is_tan_point(st, d)

    def test_after_two_rights(self):
        st = new_state(2, seed=0, track_visits=True)
        drive(st, ["right", "right"])
        assert st.position == (2, 0)
        assert not is_tan_point(st, LEFT)
        assert is_tan_point(st, RIGHT)

    def test_requires_tracking(self):
        st = new_state(2, seed=0)
        with pytest.raises(TrackingDisabledError):
            is_tan_point(st, RIGHT)

    @pytest.mark.parametrize("dim", [2, 3])
    def test_tan_point_implies_creation(self, dim):
        for seed in range(5):
            st = new_state(dim, seed=seed, track_visits=True)
            for _ in range(1500):
                out = step(st)
                if out.tan_point:
                    assert out.event is StepEvent.CREATED

    def test_outcome_tan_matches_pre_move_query(self):
        st = new_state(2, seed=13, track_visits=True)
        rng_copy = Xoshiro256PP.from_state_hex(st.rng.state_hex())
        for _ in range(500):
            code = rng_copy.next_direction(2)
            expected = is_tan_point(st, Direction.from_code(code))
            out = step(st)
            assert out.direction.code == code
            assert out.tan_point == expected

    def test_untracked_outcomes_have_no_tan_flag(self):
        st = new_state(2, seed=13)
        assert step(st).tan_point is None


class TestLineIndex:
    def test_add_remove_contains(self):
        idx = LineIndex(2)
        idx.add((1, 2))
        idx.add((1, 2))  # idempotent
        assert (1, 2) in idx
        assert len(idx) == 1
        idx.remove((1, 2))
        assert (1, 2) not in idx
        assert len(idx) == 0
        with pytest.raises(KeyError):
            idx.remove((1, 2))

    def test_no_empty_lines_after_removal(self):
        idx = LineIndex(2, [(0, 0), (1, 0)])
        idx.remove((0, 0))
        idx.remove((1, 0))
        assert idx._lines == [{}, {}]
        idx.check_consistent()

    def test_dim_one_rejected(self):
        with pytest.raises(ValueError):
            LineIndex(1)

    @pytest.mark.parametrize("dim", [2, 3, 4])
    def test_random_fuzz_against_plain_set(self, dim):
        rng = Xoshiro256PP.from_seed(2024 + dim)
        idx = LineIndex(dim)
        mirror = set()
        for _ in range(3000):
            site = tuple((rng.next_u64() % 7) - 3 for _ in range(dim))
            if rng.next_u64() & 1:
                idx.add(site)
                mirror.add(site)
            elif site in mirror:
                idx.remove(site)
                mirror.discard(site)
        assert idx.as_set() == mirror
        assert len(idx) == len(mirror)
        idx.check_consistent()

    def test_index_stays_consistent_during_runs(self):
        st = new_state(2, seed=31337, track_visits=True)
        for _ in range(40):
            run(st, 100)
            st.holes.check_consistent()
            st.visits.check_consistent()
            assert st.holes.members <= st.visits.members

    def test_snapshot_matches_count(self):
        st = new_state(2, seed=17)
        for _ in range(10):
            run(st, 200)
            snap = holes_snapshot(st)
            assert len(snap) == st.hole_count
            assert snap == sorted(snap)


class TestStatelessReplay:
    def test_replaying_directions_reproduces_outcomes(self):
        st = new_state(2, seed=61)
        outs = [step(st) for _ in range(600)]
        st2 = new_state(2, seed=0)  # different seed; directions fed explicitly
        outs2 = [apply_move(st2, o.direction) for o in outs]
        assert outs == outs2
        assert st2.holes.as_set() == st.holes.as_set()

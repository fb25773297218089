import random
from fractions import Fraction

import pytest

from scatterbits.geometry import RationalPoint
from scatterbits.protocols import MissingDetection, parse_protocol
from scatterbits.randomness import BitLedger, BitSource
from scatterbits.scheduler import (DetectionMode, SimulationState,
                                   default_max_rounds, parse_mode, parse_policy,
                                   run_to_scatter, step)


def make_state(positions, seed=0):
    return SimulationState(positions=list(positions), rng=BitSource(seed),
                           ledger=BitLedger(),
                           scheduler_rng=random.Random(seed + 1))


def gathered(n):
    return [RationalPoint.of(0, 0)] * n


FSYNC = parse_policy("fsync")
NONE = parse_mode("none")
WEAK_LOCAL = parse_mode("weak-local")
STRONG_GLOBAL = parse_mode("strong-global")


class TestTermination:
    def test_single_robot_terminates_immediately(self):
        state = make_state(gathered(1))
        record = run_to_scatter(state, parse_protocol("dp2"), NONE, FSYNC, 10)
        assert record.rounds_used == 0
        assert record.total_bits == 0
        assert not record.timed_out

    def test_scattered_start_is_terminal(self):
        state = make_state([RationalPoint.of(0, 0), RationalPoint.of(5, 5)])
        assert state.terminated
        record = run_to_scatter(state, parse_protocol("dp2"), NONE, FSYNC, 10)
        assert record.rounds_used == 0

    def test_terminated_implies_all_distinct(self):
        for seed in range(30):
            state = make_state(gathered(5), seed)
            run_to_scatter(state, parse_protocol("dp2"), WEAK_LOCAL, FSYNC, 10_000)
            if state.terminated:
                assert len(set(state.positions)) == len(state.positions)


class TestStep:
    def test_two_gathered_dp2_split_probability(self):
        hits = 0
        trials = 4000
        for seed in range(trials):
            state = make_state(gathered(2), seed)
            step(state, parse_protocol("dp2"), NONE, FSYNC)
            assert state.ledger.total == 2  # one fair bit per robot
            hits += state.terminated
        assert hits / trials == pytest.approx(0.5, abs=0.03)

    def test_four_gathered_clement_one_round(self):
        # from one point of multiplicity 4 with k=32, all-distinct probability
        # is (31*30*29)/32^3 ~ 0.823
        hits = 0
        trials = 3000
        for seed in range(trials):
            state = make_state(gathered(4), seed)
            step(state, parse_protocol("clement-global"), STRONG_GLOBAL, FSYNC)
            hits += state.terminated
        assert hits / trials == pytest.approx(26970 / 32768, abs=0.03)

    def test_biased_pair_split_probability(self):
        # split iff exactly one of the two robots moves: 2*(3/4)*(1/4) = 3/8
        hits = 0
        trials = 4000
        for seed in range(trials):
            state = make_state(gathered(2), seed)
            step(state, parse_protocol("dp2-biased"), NONE, FSYNC)
            assert state.ledger.total == 4  # 2 bits each (multiset of size 4)
            hits += state.terminated
        assert hits / trials == pytest.approx(3 / 8, abs=0.03)

    def test_lone_robot_moves_without_detection_but_is_excluded(self):
        lone = RationalPoint.of(9, 9)
        state = make_state([RationalPoint.of(0, 0), RationalPoint.of(0, 0), lone])
        step(state, parse_protocol("dp2"), NONE, FSYNC)
        assert state.positions[2] != lone          # kept moving
        assert state.ledger.robot_total(2) == 0    # but its bits never count

    def test_lone_robot_stays_with_local_detection(self):
        lone = RationalPoint.of(9, 9)
        state = make_state([RationalPoint.of(0, 0), RationalPoint.of(0, 0), lone])
        step(state, parse_protocol("dp2"), WEAK_LOCAL, FSYNC)
        assert state.positions[2] == lone

    def test_missing_detection_propagates(self):
        state = make_state(gathered(2))
        with pytest.raises(MissingDetection):
            step(state, parse_protocol("clement-global"), NONE, FSYNC)

    def test_step_on_terminal_state_rejected(self):
        state = make_state([RationalPoint.of(0, 0), RationalPoint.of(1, 1)])
        with pytest.raises(ValueError):
            step(state, parse_protocol("dp2"), NONE, FSYNC)


class TestRoundCounting:
    def test_fsync_round_per_step(self):
        state = make_state(gathered(4))
        for expected in range(1, 6):
            if state.terminated:
                break
            step(state, parse_protocol("dp2"), NONE, FSYNC)
            assert state.round_count == expected == state.step_count

    def test_round_robin_round_every_n_over_b_steps(self):
        n, block = 6, 2
        state = make_state(gathered(n))
        policy = parse_policy(f"ssync-rr:{block}")
        protocol = parse_protocol("dp2")
        for s in range(1, 13):
            if state.terminated:
                break
            step(state, protocol, NONE, policy)
            assert state.round_count == (s * block) // n

    def test_random_policy_is_fair(self):
        state = make_state(gathered(8))
        policy = parse_policy("ssync-rand:0.3")
        protocol = parse_protocol("dp2")
        record = run_to_scatter(state, protocol, NONE, policy, 5000)
        assert not record.timed_out
        assert record.rounds_used <= state.step_count

    def test_ssync_all_equals_fsync_marking(self):
        state = make_state(gathered(4))
        policy = parse_policy("ssync-all")
        step(state, parse_protocol("dp2"), NONE, policy)
        assert state.round_count == 1


class TestRunToScatter:
    def test_dp2_pair_geometric_rounds(self):
        rounds, bits = [], []
        for seed in range(3000):
            state = make_state(gathered(2), seed)
            record = run_to_scatter(state, parse_protocol("dp2"), NONE, FSYNC, 1000)
            rounds.append(record.rounds_used)
            bits.append(record.total_bits)
        assert sum(rounds) / len(rounds) == pytest.approx(2.0, rel=0.06)
        assert sum(bits) / len(bits) == pytest.approx(4.0, rel=0.06)

    def test_timeout_marks_record(self):
        state = make_state(gathered(16))
        record = run_to_scatter(state, parse_protocol("dp2"), NONE, FSYNC, 1)
        assert record.timed_out
        assert record.rounds_used == 1

    def test_clement_local_splits_fast(self):
        rounds = []
        for seed in range(500):
            state = make_state(gathered(64), seed)
            record = run_to_scatter(
                state, parse_protocol("clement-local"),
                parse_mode("strong-local"), FSYNC, 100)
            assert not record.timed_out
            rounds.append(record.rounds_used)
        assert sum(rounds) / len(rounds) <= 2.0

    def test_sa_loglog_round_bound_small(self):
        for seed in range(50):
            state = make_state(gathered(256), seed)
            record = run_to_scatter(state, parse_protocol("sa:loglog"),
                                    NONE, FSYNC, 1000)
            assert not record.timed_out
            assert record.rounds_used <= 2 * 3 + 2  # 2 f(256) + slack

    def test_partial_moves_still_scatter(self):
        state = make_state(gathered(8))
        state.move_fractions = [Fraction(1, 2), Fraction(1, 3), Fraction(1)]
        record = run_to_scatter(state, parse_protocol("dp2"), NONE, FSYNC, 10_000)
        assert not record.timed_out

    @pytest.mark.parametrize("protocol,mode", [
        ("dp2", "none"), ("dp2-biased", "weak-local"),
        ("clement-global", "strong-global"), ("sa:loglog", "weak-global")])
    def test_invariants_hold_under_ssync(self, protocol, mode):
        # the per-step exact checks raise InvariantViolation on any breach
        for seed in range(10):
            state = make_state(gathered(6), seed)
            record = run_to_scatter(state, parse_protocol(protocol),
                                    parse_mode(mode),
                                    parse_policy("ssync-rand:0.5"), 5000)
            assert not record.timed_out


def test_default_max_rounds_reasonable():
    assert default_max_rounds(parse_protocol("dp2"), 256) >= 64
    assert default_max_rounds(parse_protocol("sa:loglog"), 256) == 64 * (2 * 3 + 8)

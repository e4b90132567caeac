"""Wedge detection and randomized stress programs.

The naive-adoption wedge is the whole reason the eligibility check exists:
two same-nest gangs buried in opposite orders on two workers freeze each
other.  `run_wedge_demo` chains several wedge-prone shapes so the naive run
freezes reliably; the checked run must survive the identical program.
"""
from __future__ import annotations

import pytest

from gangsteal.stress import (
    MAX_GANGS_PER_PROGRAM,
    MAX_NEST_DEPTH,
    make_program,
    make_shape,
    run_program,
    run_stress,
    run_wedge_demo,
)


def test_wedge_demo_naive_freezes():
    completed, rt = run_wedge_demo(naive=True, watchdog=0.45)
    assert not completed
    assert rt.deadlock_detected
    assert rt.aborted


def test_wedge_demo_checked_completes():
    completed, rt = run_wedge_demo(naive=False, watchdog=10.0)
    assert completed
    assert not rt.deadlock_detected


def test_make_shape_deterministic():
    a = make_shape(123, 3)
    b = make_shape(123, 3)
    assert a == b
    assert a != make_shape(124, 3)


def test_make_program_respects_bounds():
    for seed in range(80):
        prog = make_program(seed)
        assert prog.n_workers in (2, 4, 8)
        assert prog.max_depth() <= MAX_NEST_DEPTH
        # The depth-chain family intentionally ignores the gang budget.
        if prog.total_gangs() > MAX_GANGS_PER_PROGRAM:
            assert prog.max_depth() == MAX_NEST_DEPTH

        def check(g):
            assert 1 <= g.team <= prog.n_workers
            assert 1 <= g.rounds <= 8
            assert len(g.comm_us) == g.team
            for _, _, _, child in g.children:
                check(child)

        for g in prog.gangs:
            check(g)


@pytest.mark.parametrize("seed", range(40))
def test_flat_stress_completes_with_checking(seed):
    completed, rt = run_stress(seed, n_workers=3, naive=False, watchdog=10.0)
    assert completed, f"seed {seed} wedged under eligibility checking"
    assert not rt.deadlock_detected


def test_deep_nested_program_completes():
    # seed 1 on 4 workers expands to a 6-level nest (the configured maximum).
    prog = make_program(1, 4)
    assert prog.max_depth() == MAX_NEST_DEPTH
    completed, rt = run_program(1, n_workers=4, watchdog=15.0)
    assert completed
    assert not rt.deadlock_detected

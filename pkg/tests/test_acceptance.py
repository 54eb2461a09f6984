"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The heavy fixtures (20-seed batches at 1e5 evaluations) are shared across
criteria and parallelized over ``PROTOTREE_ACCEPT_PARALLEL`` worker
processes (default: up to 2).  Run with ``pytest tests/test_acceptance.py -v -s``
to watch the lines as they appear.
"""

import math
import os

import numpy as np
import pytest

from prototree import (
    ConstantBranchSpec,
    RunConfig,
    SearchParams,
    build_function_set,
    choice_probabilities,
    from_text,
    make_problem,
    mse,
    render,
    resolve_constant,
    run,
    run_many,
    run_search,
    to_text,
)
from prototree.runner import AggregateReport, problem_datasets
from prototree.tree import PrototypeTree

PARALLELISM = int(os.environ.get("PROTOTREE_ACCEPT_PARALLEL", min(2, os.cpu_count() or 1)))
BASE_SEED = 20240
BUDGET = 100_000
RUNS = 20


def _report(number, name, ok, detail=""):
    line = f"ACCEPTANCE {number} {name}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f"  [{detail}]"
    print(line)
    assert ok, line


def _batch(problem, runs=RUNS, algorithm="ptp", iterations=BUDGET) -> AggregateReport:
    config = RunConfig(problem=problem, iterations=iterations, seed=BASE_SEED)
    return run_many(config, runs=runs, parallelism=PARALLELISM, algorithm=algorithm)


@pytest.fixture(scope="module")
def nguyen4_batch():
    return _batch("nguyen4")


@pytest.fixture(scope="module")
def nguyen7_batch():
    return _batch("nguyen7")


@pytest.fixture(scope="module")
def keijzer6_batch():
    return _batch("keijzer6")


@pytest.fixture(scope="module")
def nguyen4_baseline_batch():
    return _batch("nguyen4", runs=11, algorithm="random")


@pytest.fixture(scope="module")
def korns12_batch():
    return _batch("korns12", runs=5)


def test_criterion_1_power_law_reference_values():
    fset = make_problem("keijzer6").function_set
    tree = PrototypeTree(fset, SearchParams(k=4.0, terminal_bias_first_visit=False), ConstantBranchSpec())
    for i, rec in enumerate(tree.root.records):
        rec.best_error = float(i + 1)
        rec.eval_count = 1
    tree.root.uneval = 0
    p = choice_probabilities(tree.root, tree.params)
    ok_best = abs(p[0] - 0.924) <= 1e-3 or abs(p[0] - 0.924) / 0.924 <= 0.02
    ok_worst = abs(p[8] - 1.41e-4) <= 1e-3 and abs(p[8] - 1.41e-4) / 1.41e-4 <= 0.02
    _report(1, "power-law probabilities (N=9, k=4)", ok_best and ok_worst,
            f"p(rank1)={p[0]:.6f} p(rank9)={p[8]:.3e}")


def test_criterion_2_constant_worked_example():
    value = resolve_constant(4, (3, 1, 1))
    _report(2, "digit-concatenation constant", value == 0.0311, f"resolve_constant(4,(3,1,1))={value!r}")


def test_criterion_3_min_propagation_replay_oracle():
    checked_records = 0
    problems = [("nguyen4", 40), ("keijzer6", 10)]
    run_index = 0
    for problem_name, count in problems:
        problem = make_problem(problem_name)
        for _ in range(count):
            config = RunConfig(
                problem=problem_name,
                search=SearchParams(delta_d=0.0, delta_p=0.0),
                iterations=10_000,
                seed=BASE_SEED + run_index,
                record_instances=True,
            )
            run_index += 1
            result, tree = run_search(config, problem)
            replay = {}
            for records, raw in tree.instance_log:
                for rec in records:
                    rid = id(rec)
                    if rid not in replay or raw < replay[rid]:
                        replay[rid] = raw
            for _, _, rec in tree.iter_records():
                if rec.eval_count:
                    assert rec.best_error == replay[id(rec)], f"record mismatch (seed {config.seed})"
                    checked_records += 1
            logged_min = min(raw for _, raw in tree.instance_log)
            assert tree.best_raw_error == logged_min, f"global best mismatch (seed {config.seed})"
            train = problem_datasets(problem, config.seed)[0]
            greedy = mse(tree.best_path_expression(), train)
            assert greedy == logged_min, f"greedy path mse {greedy!r} != min {logged_min!r} (seed {config.seed})"
    _report(3, "min-propagation replay oracle (50 runs x 1e4)", True,
            f"{checked_records} records matched exactly")


def test_criterion_4_desk_scale_reproduction(nguyen4_batch, nguyen7_batch, keijzer6_batch):
    n7_median, n7_best = nguyen7_batch.train_median, nguyen7_batch.train_best
    n4_median = nguyen4_batch.train_median
    k6_median = keijzer6_batch.train_median
    ok = n7_median <= 1e-3 and n7_best <= 1e-6 and n4_median <= 1e-2 and k6_median <= 1e-3
    _report(
        4,
        "desk-scale benchmark reproduction (20 seeds x 1e5)",
        ok,
        f"nguyen7 median={n7_median:.2e} best={n7_best:.2e}; "
        f"nguyen4 median={n4_median:.2e}; keijzer6 median={k6_median:.2e}",
    )


def test_criterion_5_continued_improvement(nguyen4_batch):
    at_1e4 = float(np.median([r.best_so_far(10_000) for r in nguyen4_batch.runs]))
    at_1e5 = float(np.median([r.best_so_far(100_000) for r in nguyen4_batch.runs]))
    _report(5, "continued improvement on nguyen4", at_1e5 < at_1e4,
            f"median@1e4={at_1e4:.3e} median@1e5={at_1e5:.3e}")


def test_criterion_6_baseline_dominance(nguyen4_batch, nguyen4_baseline_batch):
    paired = nguyen4_baseline_batch.seeds
    assert paired == nguyen4_batch.seeds[: len(paired)], "seed pairing broken"
    ptp = float(np.median([r.best_train_mse for r in nguyen4_batch.runs[: len(paired)]]))
    base = float(np.median([r.best_train_mse for r in nguyen4_baseline_batch.runs]))
    _report(6, f"baseline dominance on nguyen4 ({len(paired)} paired seeds)", ptp < base,
            f"ptp median={ptp:.3e} random median={base:.3e}")


def test_criterion_7_hard_problem_plateau(korns12_batch):
    median = korns12_batch.train_median
    _report(7, "korns12 local-optimum detection (5 seeds x 1e5)", median <= 1.5,
            f"median={median:.4f}")


def test_criterion_8_determinism_and_invariants():
    config = RunConfig(problem="keijzer6", search=SearchParams(max_depth=8), iterations=400, seed=99)
    a, b = run(config), run(config)
    assert a.to_dict() == b.to_dict(), "identical configs must give identical results"

    errs = [e for _, e in a.trace]
    assert all(later <= earlier for earlier, later in zip(errs, errs[1:])), "trace must be non-increasing"

    problem = make_problem("keijzer6")
    tree = PrototypeTree(problem.function_set, SearchParams(max_depth=8), ConstantBranchSpec())
    rng = np.random.Generator(np.random.PCG64(5))
    import prototree

    for _ in range(300):
        path = tree.sample_instance(rng)
        assert prototree.depth(path.expression) <= 8, "depth cap violated"
        p = tree.choice_probabilities(path.entries[0].node)
        assert abs(p.sum() - 1.0) < 1e-12 and (p >= 0).all() and (p <= 1).all()
        tree.propagate(path, mse(path.expression, problem.training_data(np.random.Generator(np.random.PCG64(1)))))

    expr = from_text("add(mul(x,0.0311),log(add(x,7.5)))", problem.function_set)
    assert from_text(to_text(expr), problem.function_set) == expr, "text round trip broken"

    report = run_many(config, runs=2, parallelism=1)
    assert render(report, "summary-json") == render(run_many(config, runs=2, parallelism=PARALLELISM), "summary-json")

    train_a = problem_datasets(problem, 7)[0]
    train_b = problem_datasets(problem, 7)[0]
    assert train_a.X.tobytes() == train_b.X.tobytes() and train_a.y.tobytes() == train_b.y.tobytes()

    _report(8, "determinism and invariants suite", True)

# SPDX-License-Identifier: Apache-2.0
"""Smoke tests for the python bindings: import, a miniature run, the
statistics anchors, and seed determinism."""

import json

import pytest

pe = pytest.importorskip("prompt_elites")


@pytest.fixture(scope="module")
def task():
    instances = [
        {"input": f"Statement number {i} holds.", "target": "Yes" if i % 2 == 0 else "No"}
        for i in range(30)
    ]
    doc = {
        "name": "smoke",
        "task_request": "Decide whether each statement is true.",
        "llm_instruction": "Answer with Yes or No only.",
        "choices": ["Yes", "No"],
        "instances": instances,
    }
    return pe.task_from_json_text(json.dumps(doc))


def test_grammar_expansion_matches_published_example(task):
    grammar = pe.Grammar.default_grammar()
    tables = pe.GenericTables.defaults()
    gen = pe.Genotype(
        [("P", 2), ("C", 6), ("S", 0), ("R", 0), ("X", 0), ("T", 3), ("E", 0), ("I", 0)],
        [12345],
    )
    ok, _ = pe.validate(gen, grammar)
    assert ok
    tmpl = pe.expand(gen, grammar, tables)
    assert tmpl.summary.shots == 1
    assert tmpl.summary.depth == 4
    assert tmpl.summary.has_context

    text, example_ids = pe.instantiate(tmpl, task, 3, gen.example_seeds)
    assert "[[" not in text and "((" not in text
    assert 3 not in example_ids

    phenotype = pe.extract(tmpl, pe.reference_prompt_text(tmpl, task, gen.example_seeds))
    assert phenotype.shots == 1
    assert pe.bin_key(phenotype, pe.BinConfig()) [0] == 0


def test_random_genotypes_validate(task):
    grammar = pe.Grammar.default_grammar()
    for seed in range(50):
        gen = pe.random_genotype(grammar, seed, max_shots=6)
        ok, message = pe.validate(gen, grammar)
        assert ok, message


def test_statistics_anchors():
    r = pe.chi_square_2x2_yates(24, 1, 11, 14)
    assert abs(r.statistic - 13.71) < 0.01
    assert abs(r.p_value - 0.0002) < 0.0005
    assert abs(pe.cramers_v(r.statistic, 50) - 0.523) < 0.002
    assert r.significant

    flat = pe.chi_square_2x2_yates(14, 11, 13, 12)
    assert flat.statistic == 0.0 and flat.p_value == 1.0

    rho = pe.spearman([1, 2, 3, 4, 5], [2, 1, 4, 3, 5])
    assert abs(rho.statistic - 0.7) < 1e-12

    z = pe.two_proportion_z(50, 100, 30, 100)
    assert abs(z.statistic - 2.88675) < 1e-3


def test_match_answer_normalization():
    matched, ambiguous = pe.match_answer("Yes.", "yes", ["Yes", "No"])
    assert matched and not ambiguous
    matched, ambiguous = pe.match_answer("inva", "invalid", ["valid", "invalid"])
    assert matched


def test_mini_run_is_deterministic(task):
    kwargs = dict(
        algorithm="map-elites",
        mock_rule="noisy-threshold",
        population_size=12,
        num_iterations=3,
        num_evaluations=10,
        seed=42,
    )
    first = pe.run(task, **kwargs)
    second = pe.run(task, **kwargs)
    assert first.archive_json() == second.archive_json()
    assert first.run_log_json() == second.run_log_json()
    assert first.total_model_calls == 12 * 3 * 10
    assert first.archive.size() > 0
    assert not first.degraded

    elites = first.archive.elites()
    assert all(0.0 <= e.fitness <= 1.0 for e in elites)
    doc = json.loads(first.archive_json())
    assert len(doc["cells"]) == first.archive.size()


def test_zero_shot_only_pattern(task):
    result = pe.run(
        task,
        algorithm="map-elites",
        mock_rule="zero-shot-only",
        population_size=30,
        num_iterations=5,
        num_evaluations=10,
        seed=3,
    )
    hp = result.archive.coverage(min_fitness=0.55, universe=[5, 5])
    assert hp == pytest.approx(0.20)
    for elite in result.archive.elites():
        if elite.fitness > 0.55:
            assert elite.phenotype.shots == 0

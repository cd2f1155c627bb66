import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from padicwave.chain import (
    EquivalenceChain,
    MergeStep,
    MixStep,
    RegroupStep,
    SplitStep,
    merge_rounds,
    regroup_matrix,
    verify_chain,
)
from padicwave.constructions import (
    basic_haar,
    example_3_3,
    haar_function,
    random_damaged,
    split,
    theorem3_counterexample,
    unitary_mix,
)
from padicwave.linalg import random_unitary
from padicwave.padic import unit_root
from padicwave.reduction import (
    EngineLog,
    Refutation,
    S_m,
    ShapeError,
    classify_eigen,
    eigen_labels,
    find_lower_combo,
    haar_coordinates,
    haar_report,
    is_eigen_standard_haar,
    is_standard_haar,
    prop7_step,
    prop10_step,
    prop11_regroup,
    reduce_to_haar,
    reducibility_obstruction,
    solve_A0,
)
from padicwave.schwartz import distance, indicator_Zp, project_V, scaled_translate, translation_eigenvalue
from padicwave.wavelets import FAIL, PASS, VectorFunction, battery, probe_energies


def vec(*fs):
    return VectorFunction.of(*fs)


def phi_ma(p, m, a):
    return scaled_translate(indicator_Zp(p), m, a)


def same_up_to_order(u, v, tol=1e-9):
    if u.rank != v.rank:
        return False
    left = list(v)
    for f in u:
        hits = [i for i, g in enumerate(left) if distance(f, g) <= tol]
        if not hits:
            return False
        left.pop(hits[0])
    return True


@pytest.fixture(scope="module")
def t3():
    return theorem3_counterexample()


# -- steps and chains ---------------------------------------------------------

def test_step_rank_arithmetic():
    assert SplitStep(0, 1).rank_after(3, 2) == 4
    assert SplitStep(0, 2).rank_after(2, 1) == 4
    assert MixStep(np.eye(3)).rank_after(2, 3) == 3
    assert MergeStep([0, 1], 0).rank_after(2, 3) == 2
    assert RegroupStep(2, [1, 3]).rank_after(2, 2) == 1


def test_merge_step_inverts_split_step():
    theta = basic_haar(3)
    v = SplitStep(1, 1).apply(theta)
    assert v.rank == 4
    back = MergeStep([1, 2, 3], 1).apply(v)
    assert back.allclose(theta)
    assert MergeStep([1, 2, 3], 1).defect(v) < 1e-15
    assert MergeStep([0, 1, 2], 0).defect(v) > 0.1


def test_merge_rounds_undo_repeated_splits():
    p, m = 2, 3
    theta = basic_haar(p)
    v = SplitStep(0, m - 1).apply(theta)
    for s in merge_rounds(p, p - 1, m):
        v = s.apply(v)
    assert v.allclose(theta)


def test_regroup_step_matches_its_expansion():
    # the halves of theta are eigen after one diagonalizing mix
    halves = vec(*split(haar_function(2, 1), 1))
    eig, steps, labels = prop10_step(halves, 2)
    step = RegroupStep(2, labels)
    assert len(step.expand(2)) == 2
    out = step.apply(eig)
    assert out.rank == 1 and step.defect(eig) < 1e-12
    assert is_eigen_standard_haar(out)


def test_regroup_matrix_entries():
    p, m = 3, 2
    labels = [1, 2, 4, 5, 7, 8]
    R = regroup_matrix(p, m, labels)
    assert R.shape == (6, 6)
    assert np.allclose(R @ R.conj().T, np.eye(6), atol=1e-14)
    # row (mu, k) = ((mu-1) p^(m-1) + k) carries p^((1-m)/2) e^{-2 pi i l k / p^m} on label l
    assert abs(R[3 + 2, 3] - unit_root(-5 * 2, 9) / math.sqrt(3)) < 1e-15
    assert R[0, 1] == 0


def test_chain_replay_and_trace():
    v, chain = random_damaged(2, 6, 5)
    assert chain.replay().allclose(v)
    trace = chain.rank_trace()
    assert trace[0] == 1 and trace[-1] == v.rank
    rep = verify_chain(chain)
    assert rep.verdict == PASS
    assert len(rep.items) == len(chain.steps) + 1


def test_corrupted_matrix_entry_fails_at_that_step():
    v, chain = random_damaged(2, 6, 5)
    idx = next(i for i, s in enumerate(chain.steps) if s.kind == "unitary")
    bad = chain.steps[idx].matrix.copy()
    bad[0, 0] += 0.01
    steps = list(chain.steps)
    steps[idx] = MixStep(bad)
    rep = verify_chain(EquivalenceChain(chain.start, steps, chain.end))
    assert rep.verdict == FAIL
    assert rep.first_failure().witness == idx


def test_illegal_step_is_reported_not_raised():
    theta = basic_haar(2)
    rep = verify_chain(EquivalenceChain(theta, [SplitStep(3, 1)], theta))
    assert rep.verdict == FAIL and rep.first_failure().witness == 0


def test_wrong_end_is_reported():
    theta = basic_haar(3)
    chain = EquivalenceChain(theta, [MixStep(np.eye(2))], unitary_mix(theta, [[0, 1], [1, 0]]))
    rep = verify_chain(chain)
    assert rep.verdict == FAIL and rep.first_failure().witness == 1


# -- lower combinations -------------------------------------------------------

def test_find_lower_combo_examples():
    assert find_lower_combo(basic_haar(3), 1) is None
    # the halves of theta already have the full rank 2 at scale 2
    assert find_lower_combo(vec(*split(haar_function(2, 1), 1)), 2) is None
    v = example_3_3("tilde-prime")
    alpha = find_lower_combo(v, v.scale)
    assert alpha is not None and abs(np.linalg.norm(alpha) - 1) < 1e-12
    combo = sum((a * f for a, f in zip(alpha[1:], v[1:])), alpha[0] * v[0])
    assert distance(project_V(combo, v.scale - 1), combo) < 1e-12
    t = haar_function(3, 1)
    alpha = find_lower_combo(vec(t, t, haar_function(3, 2)), 1)
    assert np.allclose(np.abs(alpha), [2 ** -0.5, 2 ** -0.5, 0])
    assert abs(alpha[0] + alpha[1]) < 1e-12


def test_prop7_step_grows_rank_and_keeps_the_system():
    v = example_3_3("tilde-prime")
    alpha = find_lower_combo(v, v.scale)
    w, steps = prop7_step(v, alpha)
    assert w.rank == v.rank + 1
    assert steps[-1].kind == "split"
    e0, e1 = probe_energies(v, 1), probe_energies(w, 1)
    assert max(abs(e0[a] - e1[a]) for a in e0) < 1e-12
    chain = EquivalenceChain(v, steps, w)
    assert verify_chain(chain).verdict == PASS


def test_prop7_step_refutes_dependent_components():
    t = haar_function(3, 1)
    v = vec(t, t, haar_function(3, 2))
    with pytest.raises(Refutation) as err:
        prop7_step(v, find_lower_combo(v, 1))
    assert err.value.step == "prop7"


# -- translation matrix and eigen stage ---------------------------------------

@pytest.mark.parametrize("p", [2, 3, 5])
def test_solve_A0_on_theta(p):
    A = solve_A0(basic_haar(p))
    expected = np.diag([unit_root(-nu, p) for nu in range(1, p)])
    assert np.max(np.abs(A - expected)) < 1e-12


def test_solve_A0_examples(t3):
    _, inter = t3
    A = solve_A0(vec(inter["f0"], inter["f1"]))
    assert np.max(np.abs(A - np.diag([1j, -1j]))) < 1e-12
    A = solve_A0(vec(phi_ma(2, 1, 0), phi_ma(2, 1, Fraction(1, 2))))
    assert np.max(np.abs(A - np.array([[0, 1], [1, 0]]))) < 1e-12


def test_solve_A0_residual():
    v = example_3_3("tilde")
    m = v.scale
    while (alpha := find_lower_combo(v, m)) is not None:
        v, _ = prop7_step(v, alpha)
        m = v.scale
    A = solve_A0(v)
    for f, row in zip(v, A):
        g = sum((c * h for c, h in zip(row[1:], v[1:])), row[0] * v[0])
        assert distance(scaled_translate(f, 0, 1), g) <= 1e-9


def test_prop10_on_theta_is_identity():
    theta = basic_haar(5)
    w, steps, labels = prop10_step(theta, 1)
    assert same_up_to_order(w, theta)
    assert sorted(labels) == [1, 2, 3, 4]


def test_prop10_snaps_to_roots_of_unity():
    v = unitary_mix(basic_haar(3), random_unitary(2, np.random.default_rng(9)))
    w, _, labels = prop10_step(v, 1)
    for f, l in zip(w, labels):
        lam = translation_eigenvalue(f)
        assert lam is not None
        assert abs(lam ** 3 - 1) < 1e-12
        assert abs(lam - unit_root(-l, 3)) < 1e-9


def test_prop10_rejects_tampered_input():
    v = example_3_3("tilde")
    bad = vec(v[0] * 0.9, v[1], v[2])
    with pytest.raises(Refutation):
        reduce_to_haar(bad)


def test_S_m():
    assert S_m(2, 1) == [1]
    assert S_m(2, 2) == [1, 3]
    assert S_m(2, 3) == [1, 3, 5, 7]
    assert S_m(3, 1) == [1, 2]


def test_classify_theta():
    for p in (2, 3, 5):
        cls = classify_eigen(basic_haar(p), 1)
        assert cls.labels == list(range(1, p))
        assert cls.groups == {mu: [mu] for mu in range(1, p)}
        assert all(cls.in_S_m)


def test_classify_rejects_missing_labels():
    theta3 = basic_haar(3)
    with pytest.raises(Refutation):
        classify_eigen(vec(theta3[0]), 1)
    with pytest.raises(Refutation):
        classify_eigen(vec(theta3[0], theta3[0] * 1j), 1)


def test_regroup_for_m_equal_one_is_identity():
    theta = basic_haar(3)
    w, steps = prop11_regroup(theta, classify_eigen(theta, 1))
    assert w.allclose(theta) and steps == []


def test_regroup_outputs_are_normalized():
    for v in (example_3_3("tilde-prime"), theorem3_counterexample()[0]):
        out, chain = reduce_to_haar(v)
        for f in out:
            assert abs(f.norm() - 1) < 1e-12


# -- Haar coordinates ---------------------------------------------------------

def test_haar_coordinates_of_theta():
    c, n, U = haar_coordinates(basic_haar(3))
    assert n == 0
    assert np.allclose(U, np.eye(2))
    assert np.allclose(c[:, :, 0], np.eye(2))


def test_haar_coordinates_of_mixed_theta():
    V = random_unitary(4, np.random.default_rng(4))
    v = unitary_mix(basic_haar(5), V)
    _, n, U = haar_coordinates(v)
    assert n == 0
    assert np.max(np.abs(U - V)) < 1e-12
    assert is_standard_haar(v)


def test_haar_coordinates_with_translates():
    t = haar_function(2, 1)
    v = vec((t + scaled_translate(t, 0, Fraction(1, 2))) * 2 ** -0.5)
    _, n, U = haar_coordinates(v)
    assert n == 1 and U.shape == (2, 2)
    assert is_standard_haar(v)


def test_non_unitary_coordinates_are_not_standard_haar():
    v = vec(haar_function(2, 1) * 0.9)
    rep = haar_report(v)
    assert rep.verdict == FAIL
    assert not is_standard_haar(v)
    with pytest.raises(ShapeError):
        haar_coordinates(basic_haar(3).__class__.of(haar_function(3, 1)))
    assert not is_standard_haar(example_3_3("tilde-prime"))


# -- the engine ---------------------------------------------------------------

@pytest.mark.parametrize("p", [2, 3, 5])
def test_reduce_theta(p):
    theta = basic_haar(p)
    out, chain = reduce_to_haar(theta)
    assert same_up_to_order(out, theta)
    assert all(s.kind == "unitary" for s in chain.steps)
    assert verify_chain(chain).verdict == PASS


@pytest.mark.parametrize("stage", ["split", "split2", "tilde", "tilde-prime"])
def test_reduce_example_stages(stage):
    v = example_3_3(stage)
    out, chain = reduce_to_haar(v)
    assert out.rank == 1 and is_eigen_standard_haar(out)
    assert verify_chain(chain).verdict == PASS
    assert chain.rank_trace()[-1] == 1


def test_reduce_irreducible_basis(t3):
    psi, _ = t3
    out, chain = reduce_to_haar(psi)
    assert out.rank == 1 and is_eigen_standard_haar(out)
    assert verify_chain(chain).verdict == PASS
    basic, chain2 = reduce_to_haar(psi, to_basic=True)
    assert basic.allclose(basic_haar(2))
    assert verify_chain(chain2).verdict == PASS


@pytest.mark.parametrize("p, steps, seed", [(2, 5, 10), (2, 9, 11), (3, 3, 12), (3, 5, 13), (5, 2, 14)])
def test_reduce_random_damage(p, steps, seed):
    v, _ = random_damaged(p, steps, seed)
    out, chain = reduce_to_haar(v)
    assert out.rank == p - 1 and is_eigen_standard_haar(out)
    assert verify_chain(chain).verdict == PASS
    assert all(r % (p - 1) == 0 for r in chain.rank_trace())
    lams = sorted(cmath.phase(translation_eigenvalue(f)) for f in out)
    assert np.allclose(lams, sorted(cmath.phase(unit_root(-mu, p)) for mu in range(1, p)))


def test_prop7_count_is_bounded():
    v = example_3_3("tilde-prime")
    out, chain = reduce_to_haar(v)
    p, m = 2, max(f.scale for f in v)
    splits = sum(1 for s in chain.steps if s.kind == "split")
    assert splits <= ((p - 1) * p ** (m - 1) - v.rank) // (p - 1) + m


def test_certificate_soundness_on_corpus():
    for p, steps, seed in [(2, 4, 1), (3, 3, 2)]:
        v, _ = random_damaged(p, steps, seed)
        out, chain = reduce_to_haar(v)
        assert verify_chain(chain).passed and is_standard_haar(chain.end)
        assert all(r.verdict == PASS for r in battery(chain.start))


def test_refutations():
    with pytest.raises(Refutation) as err:
        reduce_to_haar(vec(indicator_Zp(2)))
    assert err.value.step == "scale"
    theta3 = basic_haar(3)
    with pytest.raises(Refutation) as err:
        reduce_to_haar(vec(theta3[0]))
    assert err.value.step == "rank"


def test_engine_log_gate():
    log = EngineLog(1e-9)
    log.gate(1e-10, "s", "r")
    log.gate(5e-9, "s", "r")
    assert log.marginal == [("s", 5e-9)]
    with pytest.raises(Refutation):
        log.gate(1e-7, "s", "r")
    with pytest.raises(Refutation):
        log.gate(float("nan"), "s", "r")


# -- obstruction --------------------------------------------------------------

def test_obstruction_on_irreducible_basis(t3):
    psi, _ = t3
    rep = reducibility_obstruction(psi)
    assert rep.verdict == "impossible" and rep.dimension == 3


def test_obstruction_inconclusive_on_reducible_basis():
    rep = reducibility_obstruction(example_3_3("tilde-prime"))
    assert rep.verdict == "inconclusive" and rep.dimension <= 2


def test_obstruction_shape_errors(t3):
    psi, inter = t3
    with pytest.raises(ShapeError):
        reducibility_obstruction(vec(inter["g0"], inter["g1"], inter["h2"], inter["h0"], inter["h1"]))
    with pytest.raises(ShapeError):
        reducibility_obstruction(basic_haar(5))
    deep = vec(*[scaled_translate(f, 2, 0) for f in psi])
    with pytest.raises(ShapeError):
        reducibility_obstruction(deep)


def test_eigen_labels():
    assert eigen_labels(basic_haar(5), 1) == [1, 2, 3, 4]
    assert eigen_labels(vec(haar_function(2, 1) + phi_ma(2, 1, 0)), 1) == [None]

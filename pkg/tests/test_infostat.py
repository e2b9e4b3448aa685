import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infodecomp.core import Alphabet, EncodedSequence, encode_text, generate_random, periodic_from_string
from infodecomp.infostat import (
    BackgroundModel,
    DegenerateBackground,
    background_batch,
    build_contingency,
    chi2_reference,
    contingency_batch,
    entropy_nats,
    mutual_information,
    mutual_information_counts,
    sample_background,
    z_score,
    z_scores,
)


def mi_oracle(m) -> float:
    """Mutual information of a count table, term by term in 50-digit arithmetic."""
    with mpmath.workdps(50):
        m = [[mpmath.mpf(int(v)) for v in row] for row in m]
        xlx = lambda v: v * mpmath.log(v) if v > 0 else mpmath.mpf(0)
        L = sum(sum(r) for r in m)
        x = [sum(r) for r in m]
        y = [sum(c) for c in zip(*m)]
        val = sum(xlx(v) for r in m for v in r) - sum(map(xlx, x)) - sum(map(xlx, y)) + xlx(L)
        return float(val)


def seq_of(s: str) -> EncodedSequence:
    return encode_text(s, Alphabet.from_symbols(sorted(set(s)) if len(set(s)) > 1 else "AB"))


def test_contingency_abab():
    M = build_contingency(seq_of("ABAB"), 2)
    assert M.counts.tolist() == [[2, 0], [0, 2]]
    assert M.x.tolist() == [2, 2]
    assert M.y.tolist() == [2, 2]


def test_contingency_constant():
    M = build_contingency(seq_of("AAAA"), 2)
    assert M.counts.tolist() == [[2, 0], [2, 0]]


def test_contingency_exact_period():
    M = build_contingency(periodic_from_string("ATAAACT", 100), 7)
    assert M.x.tolist() == [100] * 7
    assert ((M.counts > 0).sum(axis=1) == 1).all()


def test_contingency_period_range():
    with pytest.raises(ValueError):
        build_contingency(seq_of("ABAB"), 3)
    with pytest.raises(ValueError):
        build_contingency(seq_of("ABAB"), 1)


@given(st.integers(0, 10**6), st.integers(4, 400), st.integers(2, 6))
def test_contingency_margins(seed, L, k):
    seq = generate_random([1 / k] * k, L, seed=seed)
    n = 2 + seed % (L // 2 - 1)
    M = build_contingency(seq, n)
    assert (M.y == seq.counts()).all()
    assert M.L == L
    assert set(M.x.tolist()) <= {L // n, -(-L // n)}
    assert (M.x == -(-L // n)).sum() == (L % n if L % n else n)


def test_mi_independence():
    assert mutual_information(np.array([[25, 25], [25, 25]])) == 0.0


def test_mi_perfect_association():
    assert mutual_information(np.array([[50, 0], [0, 50]])) == pytest.approx(100 * math.log(2), rel=1e-14)


def test_mi_small_table_matches_oracle():
    # frozen from mi_oracle
    assert mutual_information(np.array([[3, 1], [1, 3]])) == pytest.approx(1.0464962875290957, rel=1e-12)
    assert mi_oracle([[3, 1], [1, 3]]) == pytest.approx(1.0464962875290957, rel=1e-15)


@settings(max_examples=200)
@given(st.lists(st.lists(st.integers(0, 9), min_size=2, max_size=6), min_size=2, max_size=6).filter(
    lambda m: len({len(r) for r in m}) == 1 and sum(map(sum, m)) > 0))
def test_mi_agrees_with_oracle(m):
    got = mutual_information(np.array(m))
    want = mi_oracle(m)
    assert got == pytest.approx(want, rel=1e-10, abs=1e-12)
    assert got >= 0


@given(st.lists(st.lists(st.integers(0, 9), min_size=3, max_size=3), min_size=3, max_size=3), st.permutations(range(3)), st.permutations(range(3)))
def test_mi_permutation_invariant(m, rows, cols):
    a = np.array(m)
    if a.sum() == 0:
        return
    assert mutual_information(a[list(rows)][:, list(cols)]) == pytest.approx(mutual_information(a), abs=1e-9)


@given(st.lists(st.integers(1, 5), min_size=2, max_size=4), st.lists(st.integers(1, 5), min_size=2, max_size=4))
def test_mi_zero_iff_rows_proportional(row_scale, col):
    # outer product tables have proportional rows -> exactly zero
    m = np.outer(row_scale, col)
    assert mutual_information(m) == 0.0
    m[0, 0] += 1
    is_prop = all(Fraction(int(r[0]), int(r[1])) == Fraction(int(m[0, 0]), int(m[0, 1])) for r in m[:, :2])
    if not is_prop:
        assert mutual_information(m) > 0


def test_mi_batch_matches_single():
    rng = np.random.default_rng(0)
    tables = rng.integers(0, 7, size=(20, 4, 3))
    batch = mutual_information_counts(tables)
    for t, v in zip(tables, batch):
        assert v == mutual_information(t)


def test_chi2_reference():
    assert chi2_reference(7, 3) == 12
    assert chi2_reference(2, 2) == 1
    for n in range(2, 30):
        assert chi2_reference(n, 4) == 3 * (n - 1)
    with pytest.raises(ValueError):
        chi2_reference(1, 4)


def test_background_model_validation():
    with pytest.raises(ValueError):
        BackgroundModel(trials=1)
    with pytest.raises(ValueError):
        BackgroundModel(phase=0)
    assert BackgroundModel.preserve_phase(1) == BackgroundModel.shuffle_all()
    assert BackgroundModel.preserve_phase(3).kind == "preserve_phase"


def test_shuffle_all_keeps_counts():
    seq = seq_of("AABB")
    seen = set()
    for t in range(1, 60):
        b = sample_background(seq, BackgroundModel(seed=1), t)
        assert sorted(b.decode()) == sorted("AABB")
        seen.add(b.decode())
    assert seen <= {"AABB", "ABAB", "ABBA", "BAAB", "BABA", "BBAA"}
    assert len(seen) == 6


def test_preserve_phase_identity_on_exact_period3():
    seq = periodic_from_string("ACG", 50)
    model = BackgroundModel.preserve_phase(3, seed=4)
    for t in (1, 2, 3):
        assert sample_background(seq, model, t) == seq


def test_preserve_phase_codon_composition():
    rng = np.random.default_rng(0)
    # coding-like: each codon position has its own base distribution
    probs = [[0.4, 0.2, 0.3, 0.1], [0.3, 0.3, 0.1, 0.3], [0.1, 0.3, 0.3, 0.3]]
    data = np.array([rng.choice(4, p=probs[i % 3]) for i in range(999)])
    seq = EncodedSequence(data, Alphabet.dna())
    b = sample_background(seq, BackgroundModel.preserve_phase(3, seed=2), 5)
    for c in range(3):
        assert (np.bincount(b.data[c::3], minlength=4) == np.bincount(seq.data[c::3], minlength=4)).all()
    assert b != seq


@given(st.integers(0, 1000), st.integers(1, 4), st.integers(2, 60))
def test_background_preserves_margins(seed, d, n):
    seq = generate_random([0.25] * 4, 200, seed=seed, alphabet=Alphabet.dna())
    model = BackgroundModel(d, trials=3, seed=seed)
    M = build_contingency(seq, n)
    for t in (1, 2, 3):
        Mb = build_contingency(sample_background(seq, model, t), n)
        assert (Mb.y == M.y).all() and (Mb.x == M.x).all()


def test_background_batch_matches_single_samples():
    seq = generate_random([0.25] * 4, 120, seed=5, alphabet=Alphabet.dna())
    for d in (1, 3):
        model = BackgroundModel(d, trials=5, seed=8)
        batch = background_batch(seq.data, model)
        for t in range(1, 6):
            assert np.array_equal(batch[t - 1], sample_background(seq, model, t).data)


def test_contingency_batch_matches_loop():
    seq = generate_random([0.25] * 4, 97, seed=5, alphabet=Alphabet.dna())
    batch = background_batch(seq.data, BackgroundModel(trials=4, seed=1))
    tables = contingency_batch(batch, 6, 4)
    for row, tab in zip(batch, tables):
        assert (build_contingency(EncodedSequence(row, seq.alphabet), 6).counts == tab).all()


def test_z_score_perfect_alternation():
    seq = periodic_from_string("AT", 350)
    for seed in (0, 1, 2):
        st_ = z_score(seq, 2, BackgroundModel(trials=100, seed=seed))
        assert st_.Z > 20
        assert st_.I == pytest.approx(700 * math.log(2))
        assert st_.J == pytest.approx(st_.I - 1)
        assert st_.df == 1


def test_z_score_constant_is_degenerate():
    seq = EncodedSequence(np.zeros(40, dtype=int), Alphabet.dna())
    with pytest.raises(DegenerateBackground):
        z_score(seq, 3, BackgroundModel(trials=10))


def test_z_score_fields_consistent():
    seq = generate_random([0.25] * 4, 500, seed=1, alphabet=Alphabet.dna())
    s = z_score(seq, 5, BackgroundModel(trials=50, seed=3))
    assert s.df == 12 and s.J == pytest.approx(s.I - 12)
    assert s.Z == pytest.approx((s.J - s.mc_mean) / s.mc_sd)


def test_z_score_deterministic_and_shared():
    seq = generate_random([0.25] * 4, 600, seed=2, alphabet=Alphabet.dna())
    model = BackgroundModel(trials=30, seed=9)
    many = z_scores(seq, [2, 5, 9], model)
    assert many[1] == z_score(seq, 5, model)
    assert z_score(seq, 5, model) == z_score(seq, 5, model)


def test_z_score_null_mostly_small():
    # Z is roughly standard normal under the null
    zs = np.array([
        z_score(generate_random([0.25] * 4, 2000, seed=s, alphabet=Alphabet.dna()), 5, BackgroundModel(trials=100, seed=s)).Z
        for s in range(200)
    ])
    assert np.mean(np.abs(zs) < 4) >= 0.99
    assert abs(zs.mean()) < 0.3


def test_entropy_nats():
    assert entropy_nats([1, 1]) == pytest.approx(math.log(2))
    assert entropy_nats([5, 0]) == 0.0


def _superadd_case(seed):
    seq = generate_random([0.25] * 4, 600, seed=seed, alphabet=Alphabet.dna())
    I = {n: mutual_information(build_contingency(seq, n)) for n in (2, 3, 6)}
    return I


@given(st.integers(0, 10**9))
def test_superadditivity_coprime(seed):
    I = _superadd_case(seed)
    assert I[6] >= I[2] + I[3] - 1e-9


@given(st.sampled_from([(2, 3), (3, 5), (2, 5), (5, 7)]))
def test_orthogonality_of_artificial_sequences(pq):
    p, q = pq
    L = 600 if (600 % (p * q) == 0) else p * q * 20
    a = np.arange(L) % p
    b = np.arange(L) % q
    counts = np.zeros((p, q), dtype=int)
    np.add.at(counts, (a, b), 1)
    assert mutual_information(counts) == 0.0


@pytest.mark.parametrize("pattern", ["ATAAACT", "ACG", "YRTDFT", "ABBC"])
def test_exact_period_plateau(pattern):
    seq = periodic_from_string(pattern, 60)
    n = len(pattern)
    want = seq.L * entropy_nats(seq.counts())
    for mult in range(1, seq.L // (2 * n) + 1):
        assert mutual_information(build_contingency(seq, mult * n)) == pytest.approx(want, rel=1e-9)

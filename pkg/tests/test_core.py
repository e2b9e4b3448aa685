import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from infodecomp.core import (
    Alphabet,
    EncodedSequence,
    MutationSpec,
    SequenceError,
    encode_text,
    generate_periodic,
    generate_random,
    hamming,
    mutate,
    normalize_text,
    periodic_from_string,
)


def test_encode_dna_canonical_order():
    seq = encode_text("acgt", "dna")
    assert seq.data.tolist() == [0, 1, 2, 3]
    assert seq.k == 4
    assert seq.L == 4


def test_encode_dna_case_insensitive_and_wrapped():
    assert encode_text("AC\ngT", "dna") == encode_text("acgt", "dna")


def test_encode_dna_skip_unknown():
    seq = encode_text("acgtx", "dna", skip_unknown=True)
    assert seq.L == 4
    assert seq.decode() == "acgt"


def test_encode_dna_rejects_unknown():
    with pytest.raises(SequenceError):
        encode_text("acgtn", "dna")


def test_encode_empty_after_normalization():
    with pytest.raises(SequenceError):
        encode_text("xxx", "dna", skip_unknown=True)
    with pytest.raises(SequenceError):
        encode_text("", "text")


def test_encode_protein_alphabet():
    seq = encode_text("MKV", "protein")
    assert seq.k == 20
    assert seq.alphabet.symbols == tuple("ACDEFGHIKLMNPQRSTVWY")
    assert seq.decode() == "MKV"


def test_text_policy_punctuation_becomes_space():
    seq = encode_text("Я помню…", "text")
    assert seq.decode() == "я помню "
    assert " " in seq.alphabet
    assert seq.alphabet.symbols[0] == " "


def test_text_policy_keeps_space_runs():
    assert normalize_text("A,  b!") == "a   b "


def test_custom_alphabet():
    ab = Alphabet.from_symbols("xyz")
    seq = encode_text("zzyx", ab)
    assert seq.data.tolist() == [2, 2, 1, 0]
    with pytest.raises(SequenceError):
        encode_text("zw", ab)


def test_alphabet_invariants():
    with pytest.raises(SequenceError):
        Alphabet(("a", "a"))
    with pytest.raises(SequenceError):
        Alphabet(("a",))
    ab = Alphabet.dna()
    assert [ab.index(s) for s in ab.symbols] == list(range(ab.k))


def test_encoded_sequence_rejects_bad_index():
    with pytest.raises(SequenceError):
        EncodedSequence([0, 4], Alphabet.dna())


@given(st.text(alphabet="acgtACGT", min_size=1, max_size=50))
def test_decode_roundtrip_dna(raw):
    assert encode_text(raw, "dna").decode() == raw.lower()


@given(st.text(min_size=1, max_size=60).filter(lambda s: normalize_text(s) and set(normalize_text(s)) != {" "}))
def test_decode_roundtrip_text(raw):
    assert encode_text(raw, "text").decode() == normalize_text(raw)


def test_generate_periodic_atacct():
    seq = periodic_from_string("ATAAACT", 100)
    assert seq.L == 700
    assert seq.alphabet.symbols == ("A", "T", "C")


def test_generate_periodic_single_and_tail():
    assert periodic_from_string("AB", 1).decode() == "AB"
    seq = periodic_from_string("ABC", 2, tail=1)
    assert seq.decode() == "ABCABCA"
    assert seq.L == 7


def test_generate_periodic_errors():
    pat = periodic_from_string("ABC", 1)
    with pytest.raises(SequenceError):
        generate_periodic(pat, 2, tail=3)
    with pytest.raises(SequenceError):
        generate_periodic(pat, 0)


@given(st.text(alphabet="ABCD", min_size=2, max_size=9).filter(lambda s: len(set(s)) > 1), st.integers(1, 20))
def test_periodic_phase_classes_constant(pattern, repeats):
    seq = periodic_from_string(pattern, repeats)
    n = len(pattern)
    for i in range(n):
        assert len(set(seq.data[i::n].tolist())) == 1


def test_generate_random_human_frequencies():
    p = [0.26, 0.24, 0.24, 0.26]
    seq = generate_random(p, 10**6, seed=3, alphabet=Alphabet.dna())
    freq = seq.counts() / seq.L
    assert np.all(np.abs(freq - p) < 0.002)


def test_generate_random_small_and_deterministic():
    seq = generate_random([0.5, 0.5], 10, seed=1)
    assert seq.L == 10 and set(seq.data.tolist()) <= {0, 1}
    assert generate_random([0.5, 0.5], 50, seed=9) == generate_random([0.5, 0.5], 50, seed=9)


def test_generate_random_errors():
    with pytest.raises(SequenceError):
        generate_random([0.5, 0.5], 10, alphabet=Alphabet.dna())
    with pytest.raises(SequenceError):
        generate_random([0.5, 0.6], 10)
    with pytest.raises(SequenceError):
        generate_random([0.5, 0.5], 0)


def test_mutate_half_of_700():
    base = periodic_from_string("ATAAACT", 100)
    out = mutate(base, MutationSpec(0.5, seed=11))
    assert hamming(base, out) == 350


def test_mutate_zero_is_identity():
    base = periodic_from_string("ATAAACT", 100)
    assert mutate(base, MutationSpec(0.0, seed=1)) == base


def test_mutate_full_binary_is_complement():
    base = generate_random([0.5, 0.5], 200, seed=2)
    out = mutate(base, MutationSpec(1.0, seed=5))
    assert np.array_equal(out.data, 1 - base.data)


def test_mutate_deterministic():
    base = periodic_from_string("ATAAACT", 100)
    assert mutate(base, MutationSpec(0.3, 4)) == mutate(base, MutationSpec(0.3, 4))


def test_mutate_redraw_mode_keeps_some():
    base = periodic_from_string("ATAAACT", 100)
    out = mutate(base, MutationSpec(0.9, 7, mode="redraw"))
    # about a third of redrawn positions keep their symbol
    assert 0.5 < hamming(base, out) / 630 < 0.8


def test_mutation_spec_validation():
    with pytest.raises(SequenceError):
        MutationSpec(1.5)
    with pytest.raises(SequenceError):
        MutationSpec(0.5, mode="other")


@settings(max_examples=50)
@given(st.floats(0, 1), st.integers(0, 2**32), st.integers(2, 6), st.integers(1, 300))
def test_mutate_hamming_exact(fraction, seed, k, L):
    base = generate_random([1 / k] * k, L, seed=seed % 1000)
    out = mutate(base, MutationSpec(fraction, seed))
    assert hamming(base, out) == int(round(fraction * L))

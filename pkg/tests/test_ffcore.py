import itertools

import numpy as np
import pytest

from ffma.ffcore import (
    ExtField,
    FieldMatrix,
    FieldMismatchError,
    FieldVector,
    PrimeField,
    ZeroInversionError,
    default_modulus,
    ext_mul,
    is_prime,
    mat_mul,
    poly_is_irreducible,
    poly_is_primitive,
    rank,
    symmetric_lift,
)


def test_primality_guard():
    with pytest.raises(ValueError):
        PrimeField(4)
    with pytest.raises(ValueError):
        PrimeField(1)
    PrimeField(1031)  # large primes stay supported
    assert is_prime(2) and not is_prime(1027)  # 1027 = 13 * 79


def test_scalar_ops_gf3():
    f = PrimeField(3)
    assert (f.scalar(2) * f.scalar(2)).value == 1
    # additive inverse acts as doubling mod 3
    for a in range(3):
        assert f.neg(a) == f.mul(2, a)


def test_inverse_matches_brute_force():
    f = PrimeField(5)
    brute = {a: next(b for b in range(1, 5) if a * b % 5 == 1) for a in range(1, 5)}
    assert brute[4] == 4
    for a in range(1, 5):
        assert f.inv(a) == brute[a]


def test_scalar_error_paths():
    f3, f5 = PrimeField(3), PrimeField(5)
    with pytest.raises(ZeroInversionError):
        f3.inv(0)
    with pytest.raises(FieldMismatchError):
        f3.scalar(1) + f5.scalar(1)


@pytest.mark.parametrize("p", [2, 3, 5, 7, 17])
def test_field_axioms_random_triples(p):
    f = PrimeField(p)
    rng = np.random.default_rng(p)
    for _ in range(1000):
        a, b, c = (int(x) for x in rng.integers(0, p, size=3))
        assert f.add(f.add(a, b), c) == f.add(a, f.add(b, c))
        assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
        assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
        assert f.add(a, f.neg(a)) == 0
        if a:
            assert f.mul(a, f.inv(a)) == 1


def test_mat_mul_against_known_products():
    f = PrimeField(3)
    t = FieldMatrix(f, [[1, 1], [2, 1]])
    assert mat_mul(FieldVector(f, [0, 1]), t) == FieldVector(f, [2, 1])
    assert mat_mul(FieldVector(f, [1, 1]), t) == FieldVector(f, [0, 2])
    assert mat_mul(FieldVector(f, [0, 0]), t) == FieldVector(f, [0, 0])
    with pytest.raises(ValueError):
        mat_mul(FieldVector(f, [1, 1, 1]), t)
    with pytest.raises(FieldMismatchError):
        mat_mul(FieldVector(PrimeField(5), [1, 1]), t)


def test_rank_known_values():
    f = PrimeField(3)
    m4 = FieldMatrix(f, [[1, 1, 1, 1], [2, 1, 2, 1], [2, 2, 1, 1], [1, 2, 2, 1]])
    assert m4.rank() == 4
    assert FieldMatrix(f, np.zeros((3, 5), dtype=int)).rank() == 0
    stacked = FieldMatrix(
        f,
        [
            [1, 0, 1, 1, 0, 0, 0],
            [0, 1, 0, 1, 1, 0, 0],
            [0, 0, 1, 0, 1, 1, 0],
            [0, 0, 0, 1, 0, 1, 1],
        ],
    )
    assert stacked.rank() == 4


def _rank_by_subset_enumeration(a: np.ndarray, p: int) -> int:
    """Largest independent row subset, checked by exhausting combinations."""
    best = 0
    n_rows = a.shape[0]
    for size in range(1, n_rows + 1):
        for rows in itertools.combinations(range(n_rows), size):
            sub = a[list(rows)]
            combos = itertools.product(range(p), repeat=size)
            dependent = any(
                not (np.array(c) @ sub % p).any() for c in combos if any(c)
            )
            if not dependent:
                best = max(best, size)
    return best


@pytest.mark.parametrize("p", [2, 3, 5])
def test_rank_matches_subset_oracle(p):
    rng = np.random.default_rng(9 + p)
    for _ in range(8):
        r, c = rng.integers(1, 6, size=2)
        a = rng.integers(0, p, size=(int(r), int(c)))
        assert rank(a, p) == _rank_by_subset_enumeration(a, p)


def test_symmetric_lift():
    assert symmetric_lift(4, 5) == -1
    assert symmetric_lift(2, 3) == -1
    assert symmetric_lift(0, 7) == 0
    for p in (2, 3, 5, 17):
        for a in range(p):
            v = symmetric_lift(a, p)
            assert v % p == a
            assert -p / 2 < v <= p / 2


# --------------------------------------------------------------------------
# extension fields
# --------------------------------------------------------------------------

def test_ext_pow_low_indices_are_unit_vectors():
    f = ExtField(PrimeField(3), 4)
    for j in range(4):
        expected = tuple(1 if i == j else 0 for i in range(4))
        assert f.ext_pow(j).coeffs == expected
    assert f.ext_pow(None).is_zero()


def test_primitive_power_map_is_bijective():
    f = ExtField(PrimeField(3), 4)
    seen = {f.ext_pow(j).coeffs for j in range(3**4 - 1)}
    assert len(seen) == 3**4 - 1
    assert all(any(c) for c in seen)
    # cycle closes exactly at the group order
    one = f.one()
    acc = f.ext_pow(1)
    period = 1
    while acc != one:
        acc = ext_mul(acc, f.ext_pow(1))
        period += 1
    assert period == 3**4 - 1


def test_ext_mul_identity_and_commutativity():
    f = ExtField(PrimeField(5), 2)
    rng = np.random.default_rng(2)
    for _ in range(50):
        a = f.element(rng.integers(0, 5, size=2))
        b = f.element(rng.integers(0, 5, size=2))
        assert ext_mul(a, f.one()) == a
        assert ext_mul(a, b) == ext_mul(b, a)


def test_default_moduli_are_primitive():
    for p, max_m in ((2, 8), (3, 8), (5, 6)):
        for m in range(1, max_m + 1):
            mod = default_modulus(p, m)
            assert len(mod) == m + 1 and mod[-1] == 1
            assert poly_is_irreducible(mod, p)
            assert poly_is_primitive(mod, p)


def test_reducible_modulus_rejected():
    # x^2 + 2x + 1 = (x+1)^2 over GF(3)
    with pytest.raises(ValueError):
        ExtField(PrimeField(3), 2, modulus=[1, 2, 1])


def test_configurable_modulus():
    # x^2 + 1 is irreducible over GF(3) but not primitive (order 4 of x divides 8)
    f = ExtField(PrimeField(3), 2, modulus=[1, 0, 1])
    assert not f.is_primitive()
    x = f.element([0, 1])
    assert ext_mul(x, x).coeffs == (2, 0)  # x^2 = -1

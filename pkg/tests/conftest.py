import numpy as np
import pytest

from ffma.ffcore import FieldMatrix, PrimeField
from ffma.eaconstruct import (
    build_ai_dcwea,
    build_bd_dcwea,
    build_dcwea_from_matrices,
    build_nocwea,
    build_pary_bd,
    build_ternary_orthogonal,
)

GF2 = PrimeField(2)
GF3 = PrimeField(3)
GF5 = PrimeField(5)

# (7,4) cyclic code with generator polynomial 1 + X^2 + X^3
CYCLIC74_BASIS = [
    [1, 0, 1, 1, 0, 0, 0],
    [0, 1, 0, 1, 1, 0, 0],
    [0, 0, 1, 0, 1, 1, 0],
    [0, 0, 0, 1, 0, 1, 1],
]

# golden sum patterns for the 2-user code built from the 2x2 ternary
# orthogonal matrix, in lexicographic block order 00..22
ORTHO2_FFSP_LEX = ["00", "21", "12", "11", "02", "20", "22", "10", "01"]

# golden sum patterns for the 2-user additive-inverse code on the first
# two cyclic basis rows, lexicographic block order
CYCLIC_AI_FFSP_LEX = [
    "0000000", "0101100", "0202200",
    "1011000", "1112100", "1210200",
    "2022000", "2120100", "2221200",
]

# golden sum-pattern sets for the basis-decomposition split of the full
# cyclic basis (two blocks of two rows), mod-2 and mod-3 accumulation
BD_FFSP_SET_GF2 = {
    "0000000", "0101100", "0001011", "1011000", "1110100",
    "1010011", "0010110", "0111010", "0011101",
}
BD_FFSP_SET_GF3 = {
    "0000000", "0101100", "0001011", "1011000", "1112100",
    "1012011", "0010110", "0111210", "0011121",
}

# same split with the low-significance block doubled
DOUBLED_BD_FFSP_SET = {
    "0000000", "0101100", "0002022", "1011000", "1112100",
    "1010022", "0020220", "0121020", "0022212",
}

# all 25 sum patterns of the 2-user 5-ary code on the split cyclic
# basis, blocks in lexicographic order 00..44
FIVEARY_FFSP_LEX = [
    "0000000", "0001011", "0002022", "0101100", "0102111",
    "0010110", "0011121", "0012102", "0111210", "0112221",
    "0020220", "0021201", "0022212", "0121020", "0122001",
    "1011000", "1012011", "1010022", "1112100", "1110111",
    "1021110", "1022121", "1020102", "1122210", "1120221",
]

# 4-user double-codeword code over GF(3^8) with Sylvester-patterned rows
SYLVESTER8_G1 = [
    [1, 1, 1, 1, 1, 1, 1, 1],
    [0, 0, 0, 0, 1, 1, 1, 1],
    [0, 0, 1, 1, 0, 0, 1, 1],
    [0, 1, 0, 1, 0, 1, 0, 1],
]


def as_digits(text: str) -> tuple[int, ...]:
    return tuple(int(c) for c in text)


def ffsp_str(vec) -> str:
    return "".join(str(c) for c in vec.coords)


@pytest.fixture(scope="session")
def ortho2_code():
    return build_ai_dcwea(build_ternary_orthogonal(1))


@pytest.fixture(scope="session")
def ortho4_code():
    return build_ai_dcwea(build_ternary_orthogonal(2))


@pytest.fixture(scope="session")
def cyclic_ai_code():
    return build_ai_dcwea(FieldMatrix(GF3, CYCLIC74_BASIS[:2]))


@pytest.fixture(scope="session")
def bd_code():
    return build_bd_dcwea(FieldMatrix(GF2, CYCLIC74_BASIS), n_d=2)


@pytest.fixture(scope="session")
def doubled_bd_code():
    g2 = FieldMatrix(GF3, CYCLIC74_BASIS[:2])
    g1 = FieldMatrix(GF3, (2 * np.array(CYCLIC74_BASIS[2:])) % 3)
    return build_dcwea_from_matrices(g1, g2)


@pytest.fixture(scope="session")
def nocwea_code():
    m1 = FieldMatrix(GF5, [[1, 1], [4, 1], [0, 1]])
    m2 = FieldMatrix(GF5, [[4, 4], [1, 4], [2, 4]])
    return build_nocwea({1: m1, 2: m2}, {"0": "0", "1": "+1", "4": "-1", "2": "+1i"})


@pytest.fixture(scope="session")
def five_ary_code():
    return build_pary_bd(5, FieldMatrix(GF2, CYCLIC74_BASIS))


@pytest.fixture(scope="session")
def sylvester8_code():
    return build_ai_dcwea(FieldMatrix(GF3, SYLVESTER8_G1))

import os
import sys

import numpy as np
import pytest

DIR_RAIZ = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.append(os.path.join(DIR_RAIZ, "src"))

from modelos.algebra import TracedAlgebra  # noqa: E402
from modelos.orlicz import OrliczFunction  # noqa: E402

DIR_CENARIOS_TESTE = os.path.join(DIR_RAIZ, "cenarios")

FORMATOS = {
    "matriz_2": [(2, 1.0)],
    "diagonal_ponderada": [(1, 0.5), (1, 2.0), (1, 1.0)],
    "padrao": [(2, 1.0), (2, 0.5), (1, 2.0)],
    "blocos_3_1": [(3, 1.0), (1, 0.25)],
}


@pytest.fixture(params=sorted(FORMATOS))
def algebra(request):
    return TracedAlgebra.from_pairs(FORMATOS[request.param])


@pytest.fixture
def algebra_padrao():
    return TracedAlgebra.from_pairs(FORMATOS["padrao"])


@pytest.fixture
def diagonal_2():
    return TracedAlgebra.diagonal([1.0, 1.0])


@pytest.fixture
def quadrado():
    return OrliczFunction.power(2.0)


@pytest.fixture
def shift_d4():
    return np.roll(np.eye(4), 1, axis=0)


@pytest.fixture
def dir_cenarios():
    return DIR_CENARIOS_TESTE

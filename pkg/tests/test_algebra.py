import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modelos.algebra import (Projection, TracedAlgebra, absolute, apply_function, functional_calculus, lp_norm,
                             projection_meet, random_element, random_unitary, spectral_decompose,
                             spectral_projection, trace, uniform_norm)
from modelos.erros import ErroDominio, ErroEstrutural

SEEDS = st.integers(min_value=0, max_value=2 ** 32)


def test_traco_da_identidade_num_bloco():
    A = TracedAlgebra.from_pairs([(2, 1.0)])
    assert trace(A, A.identity()) == pytest.approx(2.0)


def test_traco_ponderado():
    A = TracedAlgebra.diagonal([0.5, 2.0])
    assert trace(A, A.from_diagonal([1, 1])).real == pytest.approx(2.5)


def test_pesos_invalidos_rejeitados():
    with pytest.raises(ValueError):
        TracedAlgebra.from_pairs([(2, 0.0)])
    with pytest.raises(ValueError):
        TracedAlgebra(blocks=(2,), weights=(1.0, 1.0))


def test_bloco_com_formato_errado():
    A = TracedAlgebra.from_pairs([(2, 1.0)])
    with pytest.raises(ErroEstrutural):
        A.from_blocks([np.eye(3)])


def test_modulo_do_nilpotente():
    A = TracedAlgebra.from_pairs([(2, 1.0)])
    x = A.from_blocks([[[0, 1], [0, 0]]])
    assert absolute(x).allclose(A.from_diagonal([0, 1]), atol=1e-12)


def test_modulo_de_positivo_e_ele_mesmo(algebra):
    x = random_element(algebra, "positive", 7)
    assert absolute(x).allclose(x, atol=1e-10)


def test_decomposicao_espectral_diagonal():
    A = TracedAlgebra.diagonal([1.0, 1.0])
    dec = spectral_decompose(A.from_diagonal([3, 1]))
    np.testing.assert_allclose(dec.eigenvalues, [1.0, 3.0])
    assert dec.eigenprojections[0].allclose(A.from_diagonal([0, 1]))
    assert dec.eigenprojections[1].allclose(A.from_diagonal([1, 0]))


def test_decomposicao_espectral_da_identidade(algebra):
    dec = spectral_decompose(algebra.identity())
    assert dec.eigenvalues.size == 1
    assert dec.eigenvalues[0] == pytest.approx(1.0)
    assert dec.eigenprojections[0].allclose(algebra.identity())


def test_decomposicao_exige_autoadjunto():
    A = TracedAlgebra.from_pairs([(2, 1.0)])
    with pytest.raises(ErroDominio):
        spectral_decompose(A.from_blocks([[[0, 1], [0, 0]]]))


def test_apply_function_quadrado():
    A = TracedAlgebra.diagonal([1.0, 1.0])
    y = apply_function(lambda u: u ** 2, A.from_diagonal([1, 2]))
    assert y.allclose(A.from_diagonal([1, 4]), atol=1e-12)


def test_apply_function_raiz_desfaz_quadrado(algebra):
    x = random_element(algebra, "positive", 11)
    raiz = apply_function(np.sqrt, x @ x)
    assert raiz.allclose(x, atol=1e-9)


def test_apply_function_exige_positivo():
    A = TracedAlgebra.diagonal([1.0, 1.0])
    with pytest.raises(ErroDominio):
        apply_function(np.sqrt, A.from_diagonal([1, -1]))


def test_norma_uniforme():
    A = TracedAlgebra.from_pairs([(2, 1.0)])
    assert uniform_norm(A.from_blocks([[[0, 2], [0, 0]]])) == pytest.approx(2.0)
    e = random_element(A, "projection", 3)
    if e.max_abs() > 0:
        assert uniform_norm(e) == pytest.approx(1.0)


def test_norma_lp_diagonal():
    A = TracedAlgebra.diagonal([1.0, 1.0])
    assert lp_norm(A, A.from_diagonal([3, 4]), 2) == pytest.approx(5.0, rel=1e-12)


def test_norma_lp_infinito_e_uniforme(algebra):
    x = random_element(algebra, "general", 5)
    assert lp_norm(algebra, x, np.inf) == pytest.approx(uniform_norm(x))


def test_norma_lp_exige_p_maior_que_um():
    A = TracedAlgebra.diagonal([1.0])
    with pytest.raises(ErroDominio):
        lp_norm(A, A.identity(), 0.5)


def test_projecao_espectral_fechada():
    A = TracedAlgebra.diagonal([1.0, 1.0, 1.0])
    e = spectral_projection(A.from_diagonal([0.2, 0.5, 0.9]), (0.0, 0.5))
    assert e.allclose(A.from_diagonal([1, 1, 0]))


def test_projecao_espectral_aberta_exclui_fronteira():
    A = TracedAlgebra.diagonal([1.0, 1.0, 1.0])
    e = spectral_projection(A.from_diagonal([0.2, 0.5, 0.9]), (0.0, 0.5), closed=(True, False))
    assert e.allclose(A.from_diagonal([1, 0, 0]))


def test_projecao_espectral_intervalo_total(algebra):
    x = random_element(algebra, "hermitian", 2)
    assert spectral_projection(x, (-np.inf, np.inf)).allclose(algebra.identity(), atol=1e-10)


def test_infimo_de_projecoes():
    A = TracedAlgebra.diagonal([1.0, 1.0, 1.0])
    p = Projection.from_element(A.from_diagonal([1, 1, 0]))
    q = Projection.from_element(A.from_diagonal([0, 1, 1]))
    assert projection_meet([p, q]).allclose(A.from_diagonal([0, 1, 0]), atol=1e-10)


def test_infimo_com_identidade(algebra):
    e = Projection.from_element(random_element(algebra, "projection", 9))
    um = Projection.from_element(algebra.identity())
    assert projection_meet([e, um]).allclose(e, atol=1e-9)


def test_projecao_invalida_rejeitada():
    A = TracedAlgebra.diagonal([1.0, 1.0])
    with pytest.raises(ErroDominio):
        Projection.from_element(A.from_diagonal([0.5, 1]))


@settings(deadline=None, max_examples=25)
@given(seed=SEEDS)
def test_elemento_positivo_tem_espectro_nao_negativo(seed):
    A = TracedAlgebra.from_pairs([(3, 1.0), (2, 0.5)])
    x = random_element(A, "positive", seed)
    assert x.min_eigenvalue() >= -1e-12


@settings(deadline=None, max_examples=25)
@given(seed=SEEDS)
def test_projecao_aleatoria_e_idempotente(seed):
    A = TracedAlgebra.from_pairs([(3, 1.0), (2, 0.5)])
    e = random_element(A, "projection", seed)
    assert (e @ e).allclose(e, atol=1e-10)
    assert e.adjoint().allclose(e, atol=1e-10)


def test_mesma_seed_mesmo_elemento(algebra):
    assert random_element(algebra, "general", 42).allclose(random_element(algebra, "general", 42), atol=0.0)
    assert not random_element(algebra, "general", 42).allclose(random_element(algebra, "general", 43))


@settings(deadline=None, max_examples=30)
@given(seed=SEEDS)
def test_traco_e_tracial(seed):
    A = TracedAlgebra.from_pairs([(2, 1.0), (3, 0.5), (1, 2.0)])
    x = random_element(A, "general", seed)
    y = random_element(A, "general", seed + 1)
    assert abs(trace(A, x @ y) - trace(A, y @ x)) <= 1e-10 * max(1.0, uniform_norm(x) * uniform_norm(y))


@settings(deadline=None, max_examples=20)
@given(seed=SEEDS)
def test_unitaria_haar(seed):
    A = TracedAlgebra.from_pairs([(3, 1.0), (1, 2.0)])
    u = random_unitary(A, seed)
    assert (u.adjoint() @ u).allclose(A.identity(), atol=1e-10)


def test_ordem_leq():
    A = TracedAlgebra.diagonal([1.0, 1.0])
    assert A.from_diagonal([1, 2]).leq(A.from_diagonal([1, 3]))
    assert not A.from_diagonal([1, 2]).leq(A.from_diagonal([0, 3]))


@settings(deadline=None, max_examples=50)
@given(seed=SEEDS)
def test_calculo_funcional_e_homomorfismo(seed):
    A = TracedAlgebra.from_pairs([(3, 1.0), (2, 0.5), (1, 2.0)])
    x = random_element(A, "hermitian", seed)
    f, g = np.cos, lambda lam: lam ** 2 + 1.0
    fx, gx = functional_calculus(f, x), functional_calculus(g, x)
    escala = max(1.0, uniform_norm(x)) ** 2

    assert (fx @ gx).allclose(functional_calculus(lambda lam: f(lam) * g(lam), x), atol=1e-9 * escala)
    assert (fx + gx).allclose(functional_calculus(lambda lam: f(lam) + g(lam), x), atol=1e-9 * escala)
    assert functional_calculus(g, x).allclose(x @ x + A.identity(), atol=1e-9 * escala)

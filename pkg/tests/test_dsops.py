import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modelos.algebra import TracedAlgebra, random_element, random_unitary, trace, uniform_norm
from modelos.dsops import (DSOperator, compose, convex_combine, ergodic_averages, fit_rate, fixed_point_limit,
                           from_schur_correlation, from_substochastic, from_unitary_conjugation,
                           iterate_averages, kadison_check, orlicz_contractivity, verify_ds)
from modelos.erros import ErroConsistencia, ErroDominio, ErroEstrutural

SEEDS = st.integers(min_value=0, max_value=2 ** 32)


@pytest.fixture
def matriz_2():
    return TracedAlgebra.from_pairs([(2, 1.0)])


def correlacao(c):
    return np.array([[1.0, c], [c, 1.0]])


def test_conjugacao_pela_identidade(algebra):
    T = from_unitary_conjugation(algebra.identity())
    np.testing.assert_allclose(T.matrix, np.eye(algebra.vec_dimension))


def test_conjugacao_exige_unitaria(matriz_2):
    with pytest.raises(ErroDominio):
        from_unitary_conjugation(matriz_2.from_diagonal([1, 2]))


def test_schur_com_uns_e_identidade(matriz_2):
    T = from_schur_correlation(matriz_2, np.ones((2, 2)))
    np.testing.assert_allclose(T.matrix, np.eye(4))


def test_schur_com_identidade_e_parte_diagonal(matriz_2):
    T = from_schur_correlation(matriz_2, np.eye(2))
    x = random_element(matriz_2, "general", 4)
    assert T(x).allclose(x.diagonal_part(), atol=1e-12)


def test_schur_entrada_a_entrada(matriz_2):
    x = matriz_2.from_blocks([[[0, 1], [1, 0]]])
    assert from_schur_correlation(matriz_2, correlacao(0.3))(x).allclose(0.3 * x, atol=1e-12)


def test_schur_rejeita_nao_psd(matriz_2):
    with pytest.raises(ErroDominio):
        from_schur_correlation(matriz_2, correlacao(1.5))
    with pytest.raises(ErroEstrutural):
        from_schur_correlation(matriz_2, np.ones((3, 3)))


def test_permutacao_e_isometria(shift_d4):
    T = from_substochastic(shift_d4)
    cert = verify_ds(T)
    assert cert.passed
    assert cert.unital_equality and cert.trace_equality


def test_media_leva_em_media():
    A = TracedAlgebra.diagonal([1.0] * 4)
    T = from_substochastic(np.full((4, 4), 0.25))
    y = T(A.from_diagonal([4, 0, 0, 0]))
    assert y.allclose(A.identity(), atol=1e-12)


def test_meio_shift_e_ds(shift_d4):
    assert verify_ds(from_substochastic(0.5 * (shift_d4 + np.eye(4)))).passed


def test_linha_acima_de_um():
    S = np.array([[0.6, 0.6], [0.0, 0.4]])
    with pytest.raises(ErroDominio, match="linha 0"):
        from_substochastic(S)
    cert = verify_ds(from_substochastic(S, strict=False))
    assert not cert.passed
    assert "T(1) <= 1" in cert.falhas()


def test_coluna_ponderada_acima_do_peso():
    S = np.array([[0.5, 0.5], [0.5, 0.5]])
    with pytest.raises(ErroDominio, match="coluna"):
        from_substochastic(S, weights=[1.0, 3.0])


def test_certificado_unitario_com_igualdade(algebra_padrao):
    cert = verify_ds(from_unitary_conjugation(random_unitary(algebra_padrao, 3)))
    assert cert.passed
    assert cert.unital_equality and cert.trace_equality
    assert cert.complete_positivity


def test_certificado_schur(algebra_padrao):
    C = np.full((2, 2), 0.4) + 0.6 * np.eye(2)
    assert verify_ds(from_schur_correlation(algebra_padrao, C, block=1)).passed


def test_certificado_nomeia_positividade(matriz_2):
    cert = verify_ds(from_schur_correlation(matriz_2, correlacao(1.5), strict=False))
    assert not cert.complete_positivity
    assert "complete_positivity" in cert.falhas()
    assert cert.como_dict()["failed_checks"] == cert.falhas()


def test_composicao_e_mistura_sao_ds(algebra_padrao):
    T1 = from_unitary_conjugation(random_unitary(algebra_padrao, 1))
    T2 = from_schur_correlation(algebra_padrao, correlacao(0.6))
    assert verify_ds(compose(T1, T2)).passed
    assert verify_ds(convex_combine(T1, T2, 0.3)).passed
    with pytest.raises(ErroDominio):
        convex_combine(T1, T2, 1.5)


def test_composicao_rejeita_nao_ds(matriz_2):
    T1 = from_schur_correlation(matriz_2, correlacao(1.5), strict=False)
    with pytest.raises(ErroConsistencia):
        compose(T1, DSOperator.identity(matriz_2))


@settings(deadline=None, max_examples=20)
@given(seed=SEEDS)
def test_adjunta_pelo_traco(seed):
    A = TracedAlgebra.from_pairs([(2, 1.0), (2, 0.5), (1, 2.0)])
    T = convex_combine(from_unitary_conjugation(random_unitary(A, seed)),
                       from_schur_correlation(A, correlacao(0.6)), 0.5)
    x = random_element(A, "general", seed + 1)
    y = random_element(A, "general", seed + 2)
    esquerda = trace(A, T(x) @ y)
    direita = trace(A, x @ T.apply_adjoint(y))
    assert abs(esquerda - direita) <= 1e-10 * max(1.0, abs(esquerda))


def test_medias_da_identidade(algebra):
    x = random_element(algebra, "general", 8)
    for _, media, _ in iterate_averages(DSOperator.identity(algebra), x, 10):
        assert media.allclose(x, atol=1e-12)


def test_medias_alternadas(matriz_2):
    T = from_unitary_conjugation(matriz_2.from_diagonal([1, -1]))
    x = matriz_2.from_blocks([[[0, 1], [1, 0]]])
    for n, media, _ in iterate_averages(T, x, 12):
        esperado = x / n if n % 2 == 1 else matriz_2.zero()
        assert media.allclose(esperado, atol=1e-12)


def test_media_horizonte_invalido(matriz_2):
    with pytest.raises(ErroDominio):
        list(iterate_averages(DSOperator.identity(matriz_2), matriz_2.identity(), 0))


def test_potencia_e_media_como_mapa(matriz_2):
    T = from_unitary_conjugation(matriz_2.from_diagonal([1, 1j]))
    x = random_element(matriz_2, "general", 2)
    assert T.power(4)(x).allclose(x, atol=1e-12)
    *_, (n, media, _) = iterate_averages(T, x, 7)
    assert T.as_average(7)(x).allclose(media, atol=1e-12)


def test_limite_da_identidade(algebra):
    lim = fixed_point_limit(DSOperator.identity(algebra))
    assert lim.method == "espectral" and not lim.flagged
    np.testing.assert_allclose(lim.matrix, np.eye(algebra.vec_dimension), atol=1e-10)


def test_limite_da_media():
    A = TracedAlgebra.diagonal([1.0, 1.0, 1.0])
    lim = fixed_point_limit(from_substochastic(np.full((3, 3), 1 / 3)))
    assert lim.apply(A.from_diagonal([3, 0, 6])).allclose(3 * A.identity(), atol=1e-9)


def test_taxa_um_sobre_n_na_rotacao(matriz_2):
    T = from_unitary_conjugation(matriz_2.from_diagonal([1, 1j]))
    x = matriz_2.from_blocks([[[1, 1], [1, 1]]])
    lim = fixed_point_limit(T)
    x_hat = lim.apply(x)
    assert x_hat.allclose(matriz_2.identity(), atol=1e-9)
    traco = ergodic_averages(T, x, 4096, limit=x_hat)
    assert traco.rate_fit["exponent"] == pytest.approx(-1.0, abs=0.1)
    assert traco.rate_fit["finite_dimensional_artifact"]


def test_ajuste_de_taxa_sintetico():
    ns = np.arange(1, 2001)
    ajuste = fit_rate(ns, 3.0 / ns)
    assert ajuste["exponent"] == pytest.approx(-1.0, abs=1e-6)
    assert ajuste["constant"] == pytest.approx(3.0, rel=1e-6)
    assert fit_rate(ns, np.zeros(ns.size)) is None


def test_medias_da_identidade_nao_se_afastam(algebra, quadrado):
    x = random_element(algebra, "positive", 6)
    traco = ergodic_averages(DSOperator.identity(algebra), x, 8, phi=quadrado, limit=x)
    np.testing.assert_allclose(traco.frame["dist_to_limit"], 0.0, atol=1e-12)


def test_kadison_identidade(matriz_2):
    x = random_element(matriz_2, "hermitian", 1)
    assert kadison_check(DSOperator.identity(matriz_2), x) == pytest.approx(0.0, abs=1e-12)


def test_kadison_schur(matriz_2):
    c = 0.6
    x = matriz_2.from_blocks([[[0, 1], [1, 0]]])
    assert kadison_check(from_schur_correlation(matriz_2, correlacao(c)), x) == pytest.approx(1 - c ** 2)


def test_kadison_exige_autoadjunto(matriz_2):
    with pytest.raises(ErroDominio):
        kadison_check(DSOperator.identity(matriz_2), matriz_2.from_blocks([[[0, 1], [0, 0]]]))


@settings(deadline=None, max_examples=100)
@given(seed=SEEDS, lam=st.floats(min_value=0.0, max_value=1.0), c=st.floats(min_value=-1.0, max_value=1.0))
def test_kadison_varredura(seed, lam, c):
    A = TracedAlgebra.from_pairs([(2, 1.0), (3, 0.5)])
    S = convex_combine(from_unitary_conjugation(random_unitary(A, seed)), from_schur_correlation(A, correlacao(c)), lam)
    x = random_element(A, "hermitian", seed + 7)
    assert kadison_check(S, x) >= -1e-9 * uniform_norm(x) ** 2


def test_contratividade_orlicz(algebra_padrao, quadrado):
    T = convex_combine(from_unitary_conjugation(random_unitary(algebra_padrao, 5)),
                       from_schur_correlation(algebra_padrao, correlacao(0.6)), 0.5)
    assert orlicz_contractivity(T, quadrado, seed=1, n_samples=10) <= 1 + 1e-8

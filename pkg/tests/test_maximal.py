import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from pydantic import ValidationError

from modelos.algebra import TracedAlgebra, lp_norm, random_element, random_unitary, uniform_norm
from modelos.dsops import (DSOperator, FixedPointLimit, from_schur_correlation, from_substochastic,
                           from_unitary_conjugation)
from modelos.erros import ErroDominio
from modelos.maximal import (WitnessParams, buem_witness, chebyshev_projection, convergence_report,
                             measure_nbhd_bruteforce, measure_nbhd_member, truncation_sequence,
                             uem_witness, yeadon_search)
from modelos.orlicz import OrliczFunction, luxemburg_norm


@pytest.fixture
def diagonal_4():
    return TracedAlgebra.diagonal([1.0] * 4)


def test_parametros_da_prova(quadrado):
    wp = WitnessParams.from_proof(quadrado, 0.5, 1.0, 10)
    assert wp.t == pytest.approx(2.0)
    assert wp.nu == pytest.approx(0.25)
    assert wp.gamma == pytest.approx(0.125)


def test_parametros_inconsistentes():
    with pytest.raises(ValidationError):
        WitnessParams(epsilon=0.5, delta=1.0, t=2.0, nu=0.5, gamma=0.1, N=4)
    with pytest.raises(ErroDominio):
        WitnessParams.from_proof(OrliczFunction.power(2.0), 0.0, 1.0, 4)


def test_chebyshev(diagonal_2):
    e = chebyshev_projection(diagonal_2.from_diagonal([0.1, 5]), 1.0)
    assert e.allclose(diagonal_2.from_diagonal([1, 0]))
    assert chebyshev_projection(diagonal_2.from_diagonal([0.1, 5]), 6.0).allclose(diagonal_2.identity())


def test_yeadon_no_shift(diagonal_4, shift_d4):
    T = from_substochastic(shift_d4)
    rel = yeadon_search(T, diagonal_4.from_diagonal([1, 0, 0, 0]), 0.3, 64)
    assert rel.e.allclose(diagonal_4.from_diagonal([0, 0, 0, 1]), atol=1e-10)
    assert rel.trace_complement == pytest.approx(3.0)
    assert rel.parts["trace_bound"] == pytest.approx(1 / 0.3)
    assert rel.sup_bound == pytest.approx(0.25)
    assert rel.passed
    assert rel.como_dict()["e_rank"] == 1


def test_yeadon_identidade_abaixo_do_nivel(algebra):
    x = random_element(algebra, "positive", 3)
    rel = yeadon_search(DSOperator.identity(algebra), x, uniform_norm(x) * 1.01, 5)
    assert rel.e.allclose(algebra.identity(), atol=1e-10)
    assert rel.trace_complement == pytest.approx(0.0, abs=1e-10)


def test_yeadon_nao_comutativo_so_reporta_traco():
    A = TracedAlgebra.from_pairs([(3, 1.0)])
    C = 0.6 * np.eye(3) + 0.4 * np.ones((3, 3))
    x = random_element(A, "positive", 17)
    rel = yeadon_search(from_schur_correlation(A, C), x, 0.5 * uniform_norm(x), 32)
    assert "cota_de_traco_apenas_reportada" in rel.flags
    assert rel.ratio is not None
    assert rel.sup_bound <= 0.5 * uniform_norm(x) + 1e-9
    assert rel.passed


def test_yeadon_exige_positivo(diagonal_2):
    with pytest.raises(ErroDominio):
        yeadon_search(DSOperator.identity(diagonal_2), diagonal_2.from_diagonal([1, -1]), 0.5, 4)


def test_buem_do_zero(algebra_padrao, quadrado):
    T = from_unitary_conjugation(random_unitary(algebra_padrao, 2))
    rel = buem_witness(T, quadrado, 0.5, 1.0, algebra_padrao.zero(), 16)
    assert rel.e.allclose(algebra_padrao.identity(), atol=1e-10)
    assert rel.trace_complement == pytest.approx(0.0, abs=1e-10)
    assert rel.sup_bound == 0.0
    assert rel.passed


def test_buem_comutativo(diagonal_4, shift_d4, quadrado):
    T = from_substochastic(0.5 * (shift_d4 + np.eye(4)))
    x = diagonal_4.from_diagonal([0.0625, 0.01, 0.0, 0.02])
    assert luxemburg_norm(diagonal_4, x, quadrado).value <= 0.125
    rel = buem_witness(T, quadrado, 0.5, 1.0, x, 64)
    assert rel.passed, rel.flags
    assert rel.trace_complement <= 0.5
    assert rel.sup_bound <= 1.0


def test_buem_acima_do_limiar(diagonal_4, shift_d4, quadrado):
    with pytest.raises(ErroDominio):
        buem_witness(from_substochastic(shift_d4), quadrado, 0.5, 1.0, diagonal_4.identity(), 8)


def test_uem_com_conjugacao_unitaria(quadrado):
    A = TracedAlgebra.from_pairs([(2, 1.0), (1, 0.5)])
    T = from_unitary_conjugation(random_unitary(A, 9))
    x = random_element(A, "positive", 4)
    x = x * (0.25 / luxemburg_norm(A, x, quadrado).value)
    rel = uem_witness(T, quadrado, 0.5, 1.0, x, 32)
    assert rel.passed, rel.flags
    assert rel.sup_bound <= 1.0
    assert rel.parts["min_kadison_margin"] >= -1e-9
    assert rel.parts["x2_norm_discrepancy"] <= 1e-8


def test_uem_do_zero(diagonal_2, quadrado):
    rel = uem_witness(DSOperator.identity(diagonal_2), quadrado, 0.5, 1.0, diagonal_2.zero(), 4)
    assert rel.passed
    assert rel.sup_bound == 0.0


def test_uem_exige_dois_convexa(diagonal_2):
    with pytest.raises(ErroDominio):
        uem_witness(DSOperator.identity(diagonal_2), OrliczFunction.power(1.0), 0.5, 1.0, diagonal_2.zero(), 4)


def test_vizinhanca_diagonal(diagonal_2):
    rel = measure_nbhd_member(diagonal_2, diagonal_2.from_diagonal([3, 1]), 1.0, 1.0)
    assert rel.member
    assert rel.projection.allclose(diagonal_2.from_diagonal([0, 1]))
    assert rel.trace_complement == pytest.approx(1.0)
    assert not measure_nbhd_member(diagonal_2, diagonal_2.from_diagonal([3, 1]), 0.5, 1.0).member


def test_vizinhanca_com_todo_o_traco(algebra):
    x = random_element(algebra, "general", 12)
    assert measure_nbhd_member(algebra, x, algebra.trace_of_identity, 1e-6).member


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("fracao_eps,fracao_delta", [(0.13, 0.37), (0.41, 0.59), (0.77, 0.21), (0.29, 0.83)])
def test_vizinhanca_confere_com_forca_bruta(seed, fracao_eps, fracao_delta):
    A = TracedAlgebra.from_pairs([(2, 1.0), (2, 0.5), (1, 2.0)])
    x = random_element(A, "general", seed)
    eps = fracao_eps * A.trace_of_identity
    delta = fracao_delta * uniform_norm(x)
    assert measure_nbhd_member(A, x, eps, delta).member == measure_nbhd_bruteforce(A, x, eps, delta)


def test_truncamento_espectral(quadrado):
    A = TracedAlgebra.diagonal([1.0, 1.0, 1.0])
    x = A.from_diagonal([0.05, 2, 100])
    seq = dict(truncation_sequence(A, x, quadrado, [10, 1000]))
    assert seq[10] == pytest.approx(np.hypot(0.05, 100), rel=1e-10)
    assert seq[1000] == 0.0


def test_truncamento_nao_cresce(algebra, quadrado):
    x = random_element(algebra, "positive", 5)
    restos = [r for _, r in truncation_sequence(algebra, x, quadrado, [1, 2, 4, 8, 16, 1024])]
    assert all(b <= a + 1e-9 * max(1.0, a) for a, b in zip(restos, restos[1:]))


def test_convergencia_identidade(algebra, quadrado):
    x = random_element(algebra, "positive", 1)
    rel = convergence_report(DSOperator.identity(algebra), x, quadrado, 0.5, 16)
    assert rel.x_hat.allclose(x, atol=1e-10)
    np.testing.assert_allclose(rel.trace.frame["dist_to_limit"], 0.0, atol=1e-12)
    assert rel.passed


def test_convergencia_media():
    A = TracedAlgebra.diagonal([1.0, 1.0, 1.0])
    T = from_substochastic(np.full((3, 3), 1 / 3))
    rel = convergence_report(T, A.from_diagonal([3, 0, 0]), OrliczFunction.power(2.0), 0.5, 32)
    assert rel.x_hat.allclose(A.identity(), atol=1e-9)
    assert rel.limit.method == "espectral"
    assert rel.passed
    assert rel.como_dict()["x_hat"][0][0][0] == pytest.approx(1.0)
    assert rel.decay.certified and rel.decay.sandwiched_ok and rel.decay.one_sided_ok


def test_convergencia_rotacao():
    A = TracedAlgebra.from_pairs([(2, 1.0)])
    T = from_unitary_conjugation(A.from_diagonal([1, 1j]))
    rel = convergence_report(T, A.from_blocks([[[1, 1], [1, 1]]]), OrliczFunction.power(2.0), 0.5, 4096)
    assert rel.trace.rate_fit["exponent"] == pytest.approx(-1.0, abs=0.1)
    assert rel.rate_validation
    assert "taxa_1_sobre_n_artefato_de_dimensao_finita" in rel.flags
    assert {"sandwiched_dist", "one_sided_dist"} <= set(rel.trace.frame.columns)
    assert rel.decay.certified and rel.decay.sandwiched_ok
    assert rel.passed


def test_convergencia_para_limite_errado_falha(diagonal_4, quadrado):
    x = diagonal_4.from_diagonal([1.0, 2.0, 0.5, 3.0])
    falso = FixedPointLimit(diagonal_4, np.zeros((4, 4), dtype=complex), None, "espectral", False)
    rel = convergence_report(DSOperator.identity(diagonal_4), x, quadrado, 0.5, 64, limit=falso)

    assert not rel.passed
    assert not rel.decay.certified
    assert not rel.decay.sandwiched_ok
    assert "decaimento_nao_certificado" in rel.flags
    assert not rel.rate_validation
    assert "taxa_1_sobre_n_artefato_de_dimensao_finita" not in rel.flags
    assert rel.como_dict()["decay"]["certified"] is False


def test_convergencia_ponderada_certifica_decaimento():
    pesos = [1.0, 0.5, 2.0, 1.0, 1.5]
    w = np.asarray(pesos)
    S = (0.5 * np.roll(np.eye(5), 1, axis=0) + 0.5 * np.eye(5)) * np.minimum(1.0, w[None, :] / w[:, None])
    T = from_substochastic(S, pesos)
    x = T.parent.from_diagonal([0.3, 0.0, 0.1, 0.2, 0.05])
    rel = convergence_report(T, x, OrliczFunction.log_power(1.0), 0.5, 256)

    assert rel.limit.method == "espectral"
    assert rel.x_hat.allclose(T.parent.zero(), atol=1e-10)
    assert rel.decay.certified and rel.decay.sandwiched_ok
    assert rel.passed, rel.flags


def _subestocastica_ponderada(pesos, seed):
    rng = np.random.default_rng(seed)
    d = len(pesos)
    w = np.asarray(pesos, dtype=float)
    mistura = rng.dirichlet(np.ones(3))
    M = sum(p * np.eye(d)[rng.permutation(d)] for p in mistura)
    return from_substochastic(M * np.minimum(1.0, w[None, :] / w[:, None]), pesos)


PESOS_DIAGONAIS = [1.0, 0.5, 2.0, 1.0, 1.5, 0.25]


@settings(deadline=None, max_examples=100)
@given(seed=st.integers(min_value=0, max_value=2 ** 32), fracao=st.floats(min_value=0.05, max_value=1.0))
def test_yeadon_comutativo_respeita_cota_de_hopf(seed, fracao):
    T = _subestocastica_ponderada(PESOS_DIAGONAIS, seed)
    x = random_element(T.parent, "positive", seed + 1)
    nu = fracao * uniform_norm(x)
    rel = yeadon_search(T, x, nu, 32)

    assert rel.passed, rel.flags
    assert rel.trace_complement <= lp_norm(T.parent, x, 1) / nu + 1e-9
    assert rel.sup_bound <= nu + 1e-9


@pytest.mark.parametrize("seed", range(20))
@pytest.mark.parametrize("epsilon", [0.1, 0.5])
@pytest.mark.parametrize("delta", [0.5, 1.0])
def test_buem_na_grade_de_parametros(seed, epsilon, delta, quadrado):
    T = _subestocastica_ponderada(PESOS_DIAGONAIS, seed)
    x = random_element(T.parent, "positive", seed + 100)
    gamma = WitnessParams.from_proof(quadrado, epsilon, delta, 32).gamma
    x = x * (0.5 * gamma / luxemburg_norm(T.parent, x, quadrado).value)
    rel = buem_witness(T, quadrado, epsilon, delta, x, 32)

    assert rel.passed, rel.flags
    assert rel.trace_complement <= epsilon + 1e-9
    assert rel.sup_bound <= delta + 1e-8

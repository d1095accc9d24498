"""
Buscas de projeções para a desigualdade maximal e testemunhas de
equicontinuidade uniforme em medida.

A projeção de Yeadon é construída como o ínfimo das projeções espectrais
{A_n(x) <= nu}; isso dá sup_n ||e A_n(x) e||_inf <= nu por construção. A cota
de traço tau(e^perp) <= ||x||_1/nu só é afirmada no caso comutativo e apenas
reportada no caso geral.
"""
import logging
from dataclasses import dataclass, field
from itertools import combinations
from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from config import TOL_PSD
from modelos.algebra import (AlgElement, Projection, TracedAlgebra, absolute, apply_function,
                             checar_pertence, lp_norm, projection_meet, spectral_decompose,
                             spectral_projection, trace, uniform_norm)
from modelos.dsops import (DSOperator, ErgodicTrace, FixedPointLimit, ergodic_averages,
                           fixed_point_limit, iterate_averages, kadison_margin)
from modelos.erros import ErroConsistencia, ErroDominio
from modelos.orlicz import OrliczFunction, derived_tilde, lemma_constant, luxemburg_norm, two_convex_check
from modelos.symfunc import singular_value_function

logger = logging.getLogger("Maximal")

MAX_CANDIDATOS = 8
FOLGA_LIMIAR = 1e-10


class WitnessParams(BaseModel):
    """Parâmetros epsilon-delta das testemunhas com t, nu e gamma amarrados."""

    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(gt=0)
    delta: float = Field(gt=0)
    t: float = Field(gt=0)
    nu: float = Field(gt=0)
    gamma: float = Field(gt=0, le=1)
    N: int = Field(ge=1)

    @model_validator(mode="after")
    def _amarras(self):
        if self.nu > self.delta / (2 * self.t) + 1e-12:
            raise ValueError(f"nu={self.nu} acima de delta/(2t)={self.delta / (2 * self.t)}")
        if self.gamma / self.nu > self.epsilon + 1e-12:
            raise ValueError(f"gamma/nu={self.gamma / self.nu} acima de epsilon={self.epsilon}")
        return self

    @classmethod
    def from_proof(cls, phi: OrliczFunction, epsilon: float, delta: float, N: int) -> "WitnessParams":
        """t = lemma_constant(Phi, delta/2), nu = delta/(2t), gamma = min(1, epsilon nu)."""
        if epsilon <= 0 or delta <= 0:
            raise ErroDominio(f"epsilon e delta precisam ser > 0 (recebido {epsilon}, {delta})")
        t = lemma_constant(phi, delta / 2)
        nu = delta / (2 * t)
        return cls(epsilon=epsilon, delta=delta, t=t, nu=nu, gamma=min(1.0, epsilon * nu), N=N)


@dataclass
class WitnessReport:
    kind: str
    e: Projection
    trace_complement: float
    sup_bound: float
    passed: bool
    epsilon: Optional[float] = None
    delta: Optional[float] = None
    t: Optional[float] = None
    nu: Optional[float] = None
    gamma: Optional[float] = None
    ratio: Optional[float] = None
    parts: dict = field(default_factory=dict)
    flags: List[str] = field(default_factory=list)

    def como_dict(self) -> dict:
        return {
            "kind": self.kind,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "t": self.t,
            "nu": self.nu,
            "gamma": self.gamma,
            "trace_complement": self.trace_complement,
            "sup_bound": self.sup_bound,
            "pass": self.passed,
            "flags": list(self.flags),
            "ratio": self.ratio,
            "e_rank": self.e.rank(),
            "parts": self.parts,
        }


def _complemento(A: TracedAlgebra, e: Projection) -> float:
    return float(A.trace_of_identity - trace(A, e).real)


def _exigir_positivo(x: AlgElement, nome: str = "x"):
    if not x.is_positive():
        raise ErroDominio(f"{nome} precisa ser positivo (menor autovalor {x.min_eigenvalue():.3e})")


def chebyshev_projection(x: AlgElement, nu: float) -> Projection:
    """e = 1_[0, nu](x): tau(e^perp) <= tau(x)/nu e e x e <= nu e."""
    _exigir_positivo(x)
    if nu <= 0:
        raise ErroDominio(f"nu precisa ser > 0 (recebido {nu})")
    return spectral_projection(x, (0.0, nu))


def _medias(T: DSOperator, x: AlgElement, N: int) -> List[AlgElement]:
    return [media for _, media, _ in iterate_averages(T, x, N)]


def _sup_sanduiche(e: Projection, medias: Sequence[AlgElement]) -> float:
    return max((uniform_norm(e @ m @ e) for m in medias), default=0.0)


def yeadon_search(T: DSOperator, x: AlgElement, nu: float, N: int) -> WitnessReport:
    """
    e = ínfimo de {1_[0, nu](A_n(x)) : n <= N}.

    Garantia incondicional: nu e - e A_n(x) e >= 0 para todo n <= N.
    Cota de traço tau(e^perp) <= ||x||_1 / nu afirmada só se a álgebra é comutativa.
    """
    A = T.parent
    checar_pertence(A, x)
    _exigir_positivo(x)
    if nu <= 0:
        raise ErroDominio(f"nu precisa ser > 0 (recebido {nu})")

    medias = _medias(T, x, N)
    e = projection_meet([spectral_projection(m.hermitian_part(), (0.0, nu)) for m in medias])

    sup_bound, menor_folga = 0.0, np.inf
    for m in medias:
        comprimido = e @ m @ e
        sup_bound = max(sup_bound, uniform_norm(comprimido))
        menor_folga = min(menor_folga, (nu * e - comprimido).hermitian_part().min_eigenvalue())

    complemento = _complemento(A, e)
    norma_1 = lp_norm(A, x, 1)
    cota_traco = norma_1 / nu
    razao = complemento * nu / norma_1 if norma_1 > 0 else 0.0

    flags = []
    sup_ok = sup_bound <= nu + 1e-9 and menor_folga >= -TOL_PSD
    traco_ok = complemento <= cota_traco + 1e-9
    if not sup_ok:
        flags.append("sup_bound_violado")
    if A.is_commutative:
        passou = sup_ok and traco_ok
        if not traco_ok:
            flags.append("cota_de_traco_violada")
    else:
        passou = sup_ok
        flags.append("cota_de_traco_apenas_reportada")
        if not traco_ok:
            flags.append("cota_de_traco_excedida_nao_comutativo")

    logger.debug(f"Yeadon: tau(e_perp)={complemento:.6g} (cota {cota_traco:.6g}), sup={sup_bound:.6g} <= {nu}")
    return WitnessReport(
        kind="yeadon", e=e, trace_complement=complemento, sup_bound=sup_bound, passed=passou,
        epsilon=cota_traco, delta=nu, nu=nu, ratio=razao, flags=flags,
        parts={"l1_norm": norma_1, "trace_bound": cota_traco, "min_psd_margin": float(menor_folga)},
    )


def buem_witness(T: DSOperator, phi: OrliczFunction, epsilon: float, delta: float,
                 x: AlgElement, N: int) -> WitnessReport:
    """
    Testemunha de equicontinuidade bilateral: x <= x_delta + t Phi(x).

    x_delta corta o espectro de x em delta/2; a projeção vem de yeadon_search
    aplicada a Phi(x) no nível nu, e a cadeia
    sup ||e A_n(x) e|| <= sup ||e A_n(x_delta) e|| + t sup ||e A_n(Phi(x)) e|| <= delta/2 + t nu <= delta
    é conferida numericamente.

    Raises:
        ErroDominio: se ||x||_Phi > gamma
    """
    A = T.parent
    checar_pertence(A, x)
    _exigir_positivo(x)
    params = WitnessParams.from_proof(phi, epsilon, delta, N)
    norma = luxemburg_norm(A, x, phi).value
    if norma > params.gamma * (1 + FOLGA_LIMIAR):
        raise ErroDominio(f"||x||_Phi = {norma:.6g} acima do limiar gamma = {params.gamma:.6g}")

    x_h = x.hermitian_part()
    x_delta = (x_h @ spectral_projection(x_h, (-np.inf, delta / 2))).hermitian_part()
    phi_x = apply_function(phi, x_h)

    yeadon = yeadon_search(T, phi_x, params.nu, N)
    e = yeadon.e

    sup_x = _sup_sanduiche(e, _medias(T, x_h, N))
    sup_x_delta = _sup_sanduiche(e, _medias(T, x_delta, N))
    sup_phi = yeadon.sup_bound
    escala = max(1.0, uniform_norm(x_h))

    flags = list(yeadon.flags)
    cadeia_ok = sup_x <= sup_x_delta + params.t * sup_phi + 1e-9 * escala
    partes_ok = sup_x_delta <= delta / 2 + 1e-9 and params.t * sup_phi <= params.t * params.nu + 1e-9
    final_ok = sup_x <= delta + 1e-8
    complemento = yeadon.trace_complement
    traco_ok = complemento <= epsilon + 1e-9
    if not cadeia_ok:
        flags.append("cadeia_violada")
    if not partes_ok:
        flags.append("parcelas_acima_da_cota")
    if not final_ok:
        flags.append("sup_acima_de_delta")

    passou = cadeia_ok and partes_ok and final_ok
    if A.is_commutative:
        passou = passou and traco_ok
        if not traco_ok:
            flags.append("traco_acima_de_epsilon")
    elif not traco_ok:
        flags.append("traco_acima_de_epsilon_nao_comutativo")

    return WitnessReport(
        kind="buem", e=e, trace_complement=complemento, sup_bound=sup_x, passed=passou,
        epsilon=epsilon, delta=delta, t=params.t, nu=params.nu, gamma=params.gamma,
        ratio=yeadon.ratio, flags=flags,
        parts={
            "orlicz_norm": norma,
            "x_delta_sup": sup_x_delta,
            "phi_sup": sup_phi,
            "t_phi_sup": params.t * sup_phi,
            "chain_bound": delta / 2 + params.t * params.nu,
        },
    )


def uem_witness(T: DSOperator, phi: OrliczFunction, epsilon: float, delta: float,
                x: AlgElement, N: int) -> WitnessReport:
    """
    Testemunha unilateral para Phi 2-convexa.

    Resolve o problema bilateral para x^2 com (Phi~, epsilon, delta^2) e usa
    Kadison nas médias, e A_n(x)^2 e <= e A_n(x^2) e, para obter
    sup_n ||A_n(x) e||_inf <= delta.

    Raises:
        ErroDominio: Phi não 2-convexa ou ||x||_Phi > sqrt(gamma~)
    """
    A = T.parent
    checar_pertence(A, x)
    _exigir_positivo(x)
    tilde = derived_tilde(phi)
    params = WitnessParams.from_proof(tilde, epsilon, delta ** 2, N)
    norma = luxemburg_norm(A, x, phi).value
    if norma > np.sqrt(params.gamma) * (1 + FOLGA_LIMIAR):
        raise ErroDominio(f"||x||_Phi = {norma:.6g} acima de sqrt(gamma~) = {np.sqrt(params.gamma):.6g}")

    x_h = x.hermitian_part()
    x2 = (x_h @ x_h).hermitian_part()
    norma_quadrado = luxemburg_norm(A, x2, tilde).value
    discrepancia = abs(norma_quadrado - norma ** 2)

    bilateral = buem_witness(T, tilde, epsilon, delta ** 2, x2, N)
    e = bilateral.e

    sup_unilateral, menor_kadison, menor_ponte = 0.0, np.inf, np.inf
    for (_, m, _), (_, m2, _) in zip(iterate_averages(T, x_h, N), iterate_averages(T, x2, N)):
        sup_unilateral = max(sup_unilateral, uniform_norm(m @ e))
        menor_kadison = min(menor_kadison, kadison_margin(m, m2))
        menor_ponte = min(menor_ponte, (e @ m2 @ e - e @ m @ m @ e).hermitian_part().min_eigenvalue())

    escala = max(1.0, uniform_norm(x_h)) ** 2
    flags = list(bilateral.flags)
    consistencia_ok = discrepancia <= 1e-8 * max(1.0, norma ** 2)
    kadison_ok = menor_kadison >= -TOL_PSD * escala and menor_ponte >= -TOL_PSD * escala
    sup_ok = sup_unilateral <= delta + 1e-8
    if not consistencia_ok:
        flags.append("norma_de_x2_inconsistente")
    if not kadison_ok:
        flags.append("kadison_violado")
    if not sup_ok:
        flags.append("unilateral_acima_de_delta")

    return WitnessReport(
        kind="uem", e=e, trace_complement=bilateral.trace_complement, sup_bound=sup_unilateral,
        passed=bilateral.passed and consistencia_ok and kadison_ok and sup_ok,
        epsilon=epsilon, delta=delta, t=params.t, nu=params.nu, gamma=params.gamma,
        ratio=bilateral.ratio, flags=flags,
        parts={
            "orlicz_norm": norma,
            "x2_tilde_norm": norma_quadrado,
            "x2_norm_discrepancy": discrepancia,
            "sandwiched_sup_x2": bilateral.sup_bound,
            "min_kadison_margin": float(menor_kadison),
            "min_kadison_margin_compressed": float(menor_ponte),
        },
    )


class NbhdMembership(NamedTuple):
    member: bool
    projection: Optional[Projection]
    level: float
    trace_complement: Optional[float]
    one_sided_norm: Optional[float]
    two_sided_norm: Optional[float]


def measure_nbhd_member(A: TracedAlgebra, x: AlgElement, epsilon: float, delta: float) -> NbhdMembership:
    """
    x pertence a V(epsilon, delta) sse mu_epsilon(x) <= delta.

    Quando pertence, e = 1_[0, mu_epsilon](|x|) testemunha com
    tau(e^perp) <= epsilon e ||x e||_inf <= delta; a norma bilateral
    ||e x e||_inf (vizinhança W) vem junto.
    """
    checar_pertence(A, x)
    if epsilon <= 0 or delta <= 0:
        raise ErroDominio("epsilon e delta precisam ser > 0")
    nivel = float(singular_value_function(A, x)(epsilon))
    if nivel > delta:
        return NbhdMembership(False, None, nivel, None, None, None)

    e = spectral_projection(absolute(x), (-np.inf, nivel))
    complemento = _complemento(A, e)
    unilateral = uniform_norm(x @ e)
    bilateral = uniform_norm(e @ x @ e)
    escala = max(1.0, uniform_norm(x))
    if complemento > epsilon + 1e-9 or unilateral > delta + 1e-9 * escala:
        raise ErroConsistencia(
            f"testemunha de V(eps,delta) inválida: tau(e_perp)={complemento:.6g}, ||xe||={unilateral:.6g}")
    return NbhdMembership(True, e, nivel, complemento, unilateral, bilateral)


def measure_nbhd_bruteforce(A: TracedAlgebra, x: AlgElement, epsilon: float, delta: float) -> bool:
    """Enumera todas as somas de autoprojeções de |x| procurando uma testemunha."""
    checar_pertence(A, x)
    decomposicao = spectral_decompose(absolute(x))
    projecoes = decomposicao.eigenprojections
    escala = max(1.0, uniform_norm(x))
    for r in range(len(projecoes) + 1):
        for escolha in combinations(range(len(projecoes)), r):
            e = A.zero()
            for k in escolha:
                e = e + projecoes[k]
            if A.trace_of_identity - trace(A, e).real > epsilon + 1e-12:
                continue
            if uniform_norm(x @ e) <= delta + 1e-12 * escala:
                return True
    return False


def truncation_sequence(A: TracedAlgebra, x: AlgElement, phi: OrliczFunction,
                        n_list: Sequence[int]) -> List[Tuple[int, float]]:
    """(n, ||x - x e_n||_Phi) com e_n a projeção espectral de x na janela aberta (1/n, n)."""
    checar_pertence(A, x)
    _exigir_positivo(x)
    x_h = x.hermitian_part()
    saida = []
    for n in n_list:
        if n <= 0:
            raise ErroDominio(f"n precisa ser > 0 (recebido {n})")
        e_n = spectral_projection(x_h, (1.0 / n, float(n)), closed=(False, False))
        saida.append((int(n), luxemburg_norm(A, x_h - x_h @ e_n, phi).value))
    return saida


@dataclass
class CertificadoDecaimento:
    """
    Cota ||A_n(x) - x_hat||_inf <= 2 ||y||_inf / n + ||r||_inf + (n-1)/2 ||T x_hat - x_hat||_inf
    com (I - T) y = x - x_hat + r. Só vale como certificado quando x_hat é ponto
    fixo e o resíduo r é desprezível.
    """

    norm_y: float
    residual: float
    fixed_point_residual: float
    tolerance: float
    sandwiched_ok: bool
    one_sided_ok: bool

    @property
    def certified(self) -> bool:
        return self.residual <= self.tolerance and self.fixed_point_residual <= self.tolerance

    def bound(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        return 2 * self.norm_y / n + self.residual + (n - 1) / 2 * self.fixed_point_residual + self.tolerance

    def como_dict(self) -> dict:
        return {
            "norm_y": self.norm_y,
            "residual": self.residual,
            "fixed_point_residual": self.fixed_point_residual,
            "tolerance": self.tolerance,
            "certified": self.certified,
            "sandwiched_ok": self.sandwiched_ok,
            "one_sided_ok": self.one_sided_ok,
        }


def _certificado_decaimento(T: DSOperator, x: AlgElement, x_hat: AlgElement, ns: np.ndarray,
                            sanduiche: np.ndarray, unilateral: np.ndarray) -> CertificadoDecaimento:
    A = T.parent
    D = T.matrix.shape[0]
    v = x.vec() - x_hat.vec()
    y, *_ = np.linalg.lstsq(np.eye(D) - T.matrix, v, rcond=None)
    residuo = uniform_norm(A.from_vec((np.eye(D) - T.matrix) @ y - v))
    residuo_fixo = uniform_norm(T.apply(x_hat) - x_hat)
    tol = 1e-8 * max(1.0, uniform_norm(x))
    cert = CertificadoDecaimento(uniform_norm(A.from_vec(y)), residuo, residuo_fixo, tol, False, False)
    if cert.certified:
        cota = cert.bound(ns)
        cert.sandwiched_ok = bool(np.all(sanduiche <= cota))
        cert.one_sided_ok = bool(np.all(unilateral <= cota))
    return cert


@dataclass
class ConvergenceReport:
    trace: ErgodicTrace
    x_hat: AlgElement
    limit: FixedPointLimit
    e: Projection
    trace_complement: float
    tail_sup_sandwiched: float
    tail_sup_one_sided: float
    rate_validation: bool
    norm_x: float
    norm_x_hat: float
    epsilon: float
    two_convex: bool
    passed: bool
    decay: Optional[CertificadoDecaimento] = None
    flags: List[str] = field(default_factory=list)

    def como_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "trace_complement": self.trace_complement,
            "tail_sup_sandwiched": self.tail_sup_sandwiched,
            "tail_sup_one_sided": self.tail_sup_one_sided,
            "rate_validation": self.rate_validation,
            "rate_fit": self.trace.rate_fit,
            "norm_x": self.norm_x,
            "norm_x_hat": self.norm_x_hat,
            "two_convex": self.two_convex,
            "decay": self.decay.como_dict() if self.decay is not None else None,
            "limit": self.limit.como_dict(),
            "x_hat": [b for b in self.x_hat.data],
            "pass": self.passed,
            "flags": list(self.flags),
        }


def convergence_report(T: DSOperator, x: AlgElement, phi: OrliczFunction, epsilon: float, N: int,
                       limit: Optional[FixedPointLimit] = None) -> ConvergenceReport:
    """
    Convergência bilateral (b.a.u.) e unilateral (a.u.) das médias para x_hat.

    Os candidatos a e são projeções espectrais de |A_N - x_hat| nos níveis
    >= mu_epsilon (todos com tau(e^perp) <= epsilon); fica o que minimiza
    sup_{n >= N/2} ||e (A_n - x_hat) e||_inf.
    """
    A = T.parent
    checar_pertence(A, x)
    limit = fixed_point_limit(T) if limit is None else limit
    x_hat = limit.apply(x)
    traco = ergodic_averages(T, x, N, phi=phi, limit=x_hat)
    medias = _medias(T, x, N)

    flags = []
    if limit.flagged:
        flags.append("limite_estimado_por_cesaro")

    residuo_final = medias[-1] - x_hat
    dist_final = uniform_norm(residuo_final)
    validacao_taxa = dist_final <= 10 * uniform_norm(x) / N + 1e-12
    if not validacao_taxa and not limit.flagged:
        flags.append("taxa_10_sobre_N_nao_atingida")
    ajuste = traco.rate_fit
    if ajuste is not None and (validacao_taxa or abs(ajuste["exponent"] + 1) <= 0.2):
        flags.append("taxa_1_sobre_n_artefato_de_dimensao_finita")

    pertinencia = measure_nbhd_member(A, residuo_final, epsilon, np.inf)
    modulo = absolute(residuo_final)
    niveis = sorted({round(float(v), 14) for v in modulo.eigenvalues() if v > pertinencia.level})
    candidatos = [pertinencia.projection]
    for nivel in niveis[:MAX_CANDIDATOS - 1]:
        candidatos.append(spectral_projection(modulo, (-np.inf, nivel)))

    inicio_cauda = max(1, int(np.ceil(N / 2)))
    cauda = medias[inicio_cauda - 1:]
    melhor, melhor_sup = None, np.inf
    for e in candidatos:
        sup = max(uniform_norm(e @ (m - x_hat) @ e) for m in cauda)
        if sup < melhor_sup - 1e-15:
            melhor, melhor_sup = e, sup
    e = melhor
    sup_unilateral = max(uniform_norm((m - x_hat) @ e) for m in cauda)

    traco.frame["sandwiched_dist"] = [uniform_norm(e @ (m - x_hat) @ e) for m in medias]
    traco.frame["one_sided_dist"] = [uniform_norm((m - x_hat) @ e) for m in medias]
    decaimento = _certificado_decaimento(T, x, x_hat, traco.frame["n"].to_numpy(),
                                         traco.frame["sandwiched_dist"].to_numpy(),
                                         traco.frame["one_sided_dist"].to_numpy())
    if not decaimento.certified:
        flags.append("decaimento_nao_certificado")

    norma_x = luxemburg_norm(A, x, phi).value
    norma_x_hat = luxemburg_norm(A, x_hat, phi).value
    contrativo = norma_x_hat <= norma_x + 1e-8
    if not contrativo:
        flags.append("norma_do_limite_acima_de_x")

    complemento = _complemento(A, e)
    traco_ok = complemento <= epsilon + 1e-9
    dois_convexa = two_convex_check(phi)
    # com limite de Cesàro a cota não se aplica; o decaimento fica só reportado
    decaimento_ok = True
    if not limit.flagged:
        decaimento_ok = decaimento.certified and decaimento.sandwiched_ok
        if dois_convexa:
            decaimento_ok = decaimento_ok and decaimento.one_sided_ok
    passou = contrativo and traco_ok and decaimento_ok

    if passou:
        logger.info(f"✅ Convergência: tau(e_perp)={complemento:.4g} <= {epsilon}, cauda={melhor_sup:.3e}")
    else:
        logger.warning(f"⚠️ Convergência com falhas: {flags}")

    return ConvergenceReport(
        trace=traco, x_hat=x_hat, limit=limit, e=e, trace_complement=complemento,
        tail_sup_sandwiched=melhor_sup, tail_sup_one_sided=sup_unilateral,
        rate_validation=validacao_taxa, norm_x=norma_x, norm_x_hat=norma_x_hat,
        epsilon=epsilon, two_convex=dois_convexa, passed=passou, decay=decaimento, flags=flags,
    )

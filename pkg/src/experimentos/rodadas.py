"""
Rodadas dos subcomandos ergodic, maximal, boyd e norms.

Cada função recebe um Cenario montado e o diretório de saída, grava os
artefatos (CSV/JSON) do cenário e devolve o RunReport.
"""
import logging

import numpy as np
import pandas as pd

from modelos.algebra import absolute, lp_norm, random_element, uniform_norm
from modelos.dsops import verify_ds
from modelos.maximal import (WitnessParams, buem_witness, convergence_report, truncation_sequence,
                             uem_witness, yeadon_search)
from modelos.orlicz import derived_tilde, luxemburg_norm, luxemburg_norm_sf, modular_bound_check, two_convex_check
from modelos.symfunc import boyd_estimate, singular_value_function
from experimentos.cenarios import Cenario, derivar_seed
from reports.data import RunReport
from reports.generator import anexar_csv, anexar_json

logger = logging.getLogger("Rodadas")


def _certificar(cen: Cenario, rel: RunReport) -> bool:
    cert = verify_ds(cen.operador, seed=cen.seed)
    return rel.registrar("dsops.verify_ds", cert.passed, cert.como_dict(), detalhe=", ".join(cert.falhas()))


def cmd_ergodic(cen: Cenario, out: str) -> RunReport:
    """Médias ergódicas, limite x_hat e busca da projeção de convergência."""
    rel = RunReport(scenario_id=cen.id, comando="ergodic", seed=cen.seed)
    if not _certificar(cen, rel):
        return rel

    phi, x = cen.phi, cen.x
    N = cen.config.horizon
    conv = convergence_report(cen.operador, x, phi, cen.config.params.epsilon, N)
    frame = conv.trace.frame

    norma_inf = uniform_norm(x)
    rel.registrar("ergodic.cesaro_sup_bound", bool((frame["sup_norm"] <= norma_inf * (1 + 1e-9)).all()),
                  float(frame["sup_norm"].max()))
    rel.registrar("ergodic.orlicz_contractivity", bool((frame["orlicz_norm"] <= conv.norm_x + 1e-8).all()),
                  float(frame["orlicz_norm"].max()))
    rel.registrar("ergodic.limit_in_orlicz_ball", conv.norm_x_hat <= conv.norm_x + 1e-8,
                  {"norm_x": conv.norm_x, "norm_x_hat": conv.norm_x_hat})
    rel.registrar("ergodic.trace_complement", conv.trace_complement <= conv.epsilon + 1e-9, conv.trace_complement)
    certificado = not conv.limit.flagged
    rel.registrar("ergodic.decay_certificate", conv.decay.certified, conv.decay.como_dict(), asserted=certificado)
    rel.registrar("ergodic.sandwiched_tail", conv.decay.sandwiched_ok, conv.tail_sup_sandwiched, asserted=certificado)
    if conv.two_convex:
        rel.registrar("ergodic.one_sided_tail", conv.decay.one_sided_ok, conv.tail_sup_one_sided,
                      asserted=certificado)
    rel.registrar("ergodic.rate_validation", conv.rate_validation, conv.trace.rate_fit, asserted=False)

    colunas = ["n", "sup_norm", "orlicz_norm", "dist_to_limit", "sandwiched_dist", "one_sided_dist"]
    anexar_csv(rel, out, "ergodic", frame[colunas])
    anexar_json(rel, out, "ergodic", conv.como_dict())
    rel.resumo = {
        "rate_fit": conv.trace.rate_fit,
        "limit_method": conv.limit.method,
        "flags": conv.flags,
        "tail_sup_sandwiched": conv.tail_sup_sandwiched,
    }
    return rel


def cmd_maximal(cen: Cenario, out: str) -> RunReport:
    """Busca de Yeadon e testemunhas bilateral/unilateral no elemento do cenário."""
    rel = RunReport(scenario_id=cen.id, comando="maximal", seed=cen.seed)
    if not _certificar(cen, rel):
        return rel

    A, T, phi = cen.algebra, cen.operador, cen.phi
    params = cen.config.params
    N = cen.config.horizon
    x = cen.x
    flags = []
    if not x.is_positive():
        x = absolute(x)
        flags.append("elemento_substituido_por_modulo")

    wp = WitnessParams.from_proof(phi, params.epsilon, params.delta, N)
    nu = params.nu if params.nu is not None else wp.nu
    saida = {"params": wp.model_dump(), "flags": flags}

    yeadon = yeadon_search(T, x, nu, N)
    saida["yeadon"] = yeadon.como_dict()
    rel.registrar("maximal.yeadon", yeadon.passed, yeadon.como_dict())
    rel.registrar("maximal.yeadon_ratio", True, yeadon.ratio, asserted=False)

    norma = luxemburg_norm(A, x, phi).value
    if norma <= wp.gamma * (1 + 1e-10):
        buem = buem_witness(T, phi, params.epsilon, params.delta, x, N)
        saida["buem"] = buem.como_dict()
        rel.registrar("maximal.buem", buem.passed, buem.como_dict())
    else:
        saida["buem"] = {"skipped": f"||x||_Phi = {norma:.6g} > gamma = {wp.gamma:.6g}"}

    if two_convex_check(phi):
        gamma_tilde = WitnessParams.from_proof(derived_tilde(phi), params.epsilon, params.delta ** 2, N).gamma
        if norma <= np.sqrt(gamma_tilde) * (1 + 1e-10):
            uem = uem_witness(T, phi, params.epsilon, params.delta, x, N)
            saida["uem"] = uem.como_dict()
            rel.registrar("maximal.uem", uem.passed, uem.como_dict())
        else:
            saida["uem"] = {"skipped": f"||x||_Phi = {norma:.6g} > sqrt(gamma~) = {np.sqrt(gamma_tilde):.6g}"}

    anexar_json(rel, out, "maximal", saida)
    rel.resumo = {
        "trace_complement": yeadon.trace_complement,
        "trace_bound": yeadon.parts["trace_bound"],
        "sup_bound": yeadon.sup_bound,
        "ratio": yeadon.ratio,
    }
    return rel


def cmd_boyd(cen: Cenario, out: str) -> RunReport:
    """Estimativa dos índices de Boyd de L^Phi(0, inf)."""
    rel = RunReport(scenario_id=cen.id, comando="boyd", seed=cen.seed)
    est = boyd_estimate(cen.phi)
    acima = est.s_grid >= 1
    rel.registrar("boyd.dilation_norm_at_least_one", bool(np.all(est.dilation_norm_lower[acima] >= 1 - 1e-12)),
                  float(est.dilation_norm_lower[acima].min()))
    rel.registrar("boyd.index_order", 1 - 0.05 <= est.p_hat <= est.q_hat + 0.05,
                  {"p_hat": est.p_hat, "q_hat": est.q_hat})
    anexar_csv(rel, out, "boyd", est.to_frame())
    rel.resumo = est.como_dict()
    return rel


def cmd_norms(cen: Cenario, out: str) -> RunReport:
    """Tabela de normas de Luxemburg pelos dois caminhos (matricial e mu)."""
    rel = RunReport(scenario_id=cen.id, comando="norms", seed=cen.seed)
    A, phi = cen.algebra, cen.phi
    potencia = phi.p if phi.kind == "power" else None

    amostras = [("cenario", cen.x)]
    for i in range(cen.config.params.n_samples):
        amostras.append((f"amostra_{i}", random_element(A, "general", derivar_seed(cen.seed, "normas", i))))

    linhas = []
    for nome, x in amostras:
        matricial = luxemburg_norm(A, x, phi)
        comutativo = luxemburg_norm_sf(singular_value_function(A, x), phi)
        linha = {
            "sample": nome,
            "matrix_norm": matricial.value,
            "sf_norm": comutativo.value,
            "discrepancy": abs(matricial.value - comutativo.value),
            "modular_at_norm": matricial.modular_at_value,
            "lp_norm": np.nan,
            "lp_discrepancy": np.nan,
        }
        if potencia is not None:
            linha["lp_norm"] = lp_norm(A, x, potencia)
            linha["lp_discrepancy"] = abs(linha["lp_norm"] - matricial.value)
        linhas.append(linha)
    tabela = pd.DataFrame(linhas)

    escala = np.maximum(1.0, tabela["matrix_norm"].to_numpy())
    pior = float(np.max(tabela["discrepancy"].to_numpy() / escala))
    rel.registrar("norms.dual_path", pior <= 1e-8, pior)
    if potencia is not None:
        pior_lp = float(np.max(tabela["lp_discrepancy"].to_numpy() / escala))
        rel.registrar("norms.lp_match", pior_lp <= 1e-8, pior_lp)

    falhas_cota = 0
    for _, x in amostras:
        n = luxemburg_norm(A, x, phi).value
        if n > 0 and not modular_bound_check(A, x * (0.7 / n), phi):
            falhas_cota += 1
    rel.registrar("norms.modular_bound", falhas_cota == 0, falhas_cota)

    positivo = absolute(cen.x)
    n_list = [2 ** k for k in range(0, 11)]
    truncamento = pd.DataFrame(truncation_sequence(A, positivo, phi, n_list), columns=["n", "remainder_norm"])
    restos = truncamento["remainder_norm"].to_numpy()
    rel.registrar("norms.truncation_nonincreasing", bool(np.all(np.diff(restos) <= 1e-9 * max(1.0, restos[0]))),
                  restos.tolist())

    anexar_csv(rel, out, "norms", tabela)
    anexar_csv(rel, out, "truncation", truncamento)
    rel.resumo = {"max_discrepancy": pior, "phi": phi.descricao}
    return rel

"""
Suíte de invariantes (subcomando verify).

Roda, para um cenário, as checagens de cada modelo em amostras semeadas e
registra tudo num RunReport. Quantidades que a teoria não garante no caso
não comutativo entram com asserted=False.
"""
import logging

import numpy as np

from modelos.algebra import (absolute, apply_function, random_element, random_unitary,
                             spectral_decompose, trace, uniform_norm, lp_norm)
from modelos.dsops import iterate_averages, kadison_check, orlicz_contractivity, verify_ds
from modelos.maximal import (WitnessParams, buem_witness, chebyshev_projection, measure_nbhd_bruteforce,
                             measure_nbhd_member, uem_witness, yeadon_search)
from modelos.orlicz import (derived_tilde, luxemburg_norm, luxemburg_norm_sf, modular,
                            modular_bound_check, two_convex_check)
from modelos.symfunc import sf_integral, singular_value_function
from experimentos.cenarios import Cenario, derivar_seed
from reports.data import RunReport

logger = logging.getLogger("Suite")


def _amostras(cen: Cenario, kind: str, rotulo: str):
    n = cen.config.params.n_samples
    for i in range(n):
        yield random_element(cen.algebra, kind, derivar_seed(cen.seed, "suite", rotulo, i))


def verificar_algebra(cen: Cenario, rel: RunReport):
    A = cen.algebra
    escala_traco = A.trace_of_identity
    pior_traco, menor_fiel, pior_espectral, pior_cheb = 0.0, np.inf, 0.0, -np.inf
    for x, y in zip(_amostras(cen, "general", "alg_x"), _amostras(cen, "general", "alg_y")):
        erro = abs(trace(A, x @ y) - trace(A, y @ x))
        pior_traco = max(pior_traco, erro / (uniform_norm(x) * uniform_norm(y) * escala_traco))
        menor_fiel = min(menor_fiel, trace(A, x.adjoint() @ x).real)
        h = x.hermitian_part()
        reconstrucao = spectral_decompose(h).reconstruct()
        pior_espectral = max(pior_espectral, uniform_norm(h - reconstrucao) / max(uniform_norm(h), 1e-300))
        p = (x @ x.adjoint()).hermitian_part()
        nu = 0.5 * uniform_norm(p)
        e = chebyshev_projection(p, nu)
        folga = trace(A, e.complement()).real - trace(A, p).real / nu
        pior_cheb = max(pior_cheb, folga)

    rel.registrar("algebra.traciality", pior_traco <= 1e-10, pior_traco)
    rel.registrar("algebra.faithfulness", menor_fiel > 0, menor_fiel)
    rel.registrar("algebra.spectral_reconstruction", pior_espectral <= 1e-9, pior_espectral)
    rel.registrar("algebra.chebyshev", pior_cheb <= 1e-9, pior_cheb)


def verificar_symfunc(cen: Cenario, rel: RunReport):
    A = cen.algebra
    pior_l1, pior_inf, pior_unitario = 0.0, 0.0, 0.0
    for i, x in enumerate(_amostras(cen, "general", "sym")):
        mu = singular_value_function(A, x)
        pior_l1 = max(pior_l1, abs(sf_integral(mu) - lp_norm(A, x, 1)))
        pior_inf = max(pior_inf, abs(float(mu(0.0)) - uniform_norm(x)))
        u = random_unitary(A, derivar_seed(cen.seed, "sym_u", i))
        v = random_unitary(A, derivar_seed(cen.seed, "sym_v", i))
        if not singular_value_function(A, u @ x @ v).isclose(mu, atol=1e-9):
            pior_unitario = max(pior_unitario, 1.0)
    rel.registrar("symfunc.l1_integral", pior_l1 <= 1e-9 * A.trace_of_identity, pior_l1)
    rel.registrar("symfunc.sup_first_piece", pior_inf <= 1e-9, pior_inf)
    rel.registrar("symfunc.unitary_invariance", pior_unitario == 0.0, pior_unitario)


def verificar_orlicz(cen: Cenario, rel: RunReport):
    A, phi = cen.algebra, cen.phi
    cert = phi.verificar()
    rel.registrar("orlicz.certificate", cert["ok"], cert)

    pior_dupla, pior_modular, pior_mu, falhas_cota = 0.0, 0.0, 0.0, 0
    for x in _amostras(cen, "general", "orl"):
        mu = singular_value_function(A, x)
        matricial = luxemburg_norm(A, x, phi).value
        comutativo = luxemburg_norm_sf(mu, phi).value
        pior_dupla = max(pior_dupla, abs(matricial - comutativo) / max(1.0, matricial))
        pior_modular = max(pior_modular, abs(modular(A, x, phi) - sf_integral(mu.map_values(phi))))
        mu_phi = singular_value_function(A, apply_function(phi, absolute(x)))
        if not mu_phi.isclose(mu.map_values(phi), atol=1e-9):
            pior_mu += 1
        if not modular_bound_check(A, x * (0.7 / matricial), phi):
            falhas_cota += 1

    rel.registrar("orlicz.dual_path_norm", pior_dupla <= 1e-8, pior_dupla)
    rel.registrar("orlicz.modular_identity", pior_modular <= 1e-9 * max(1.0, A.trace_of_identity), pior_modular)
    rel.registrar("orlicz.mu_of_phi", pior_mu == 0, pior_mu)
    rel.registrar("orlicz.modular_bound", falhas_cota == 0, falhas_cota)
    if two_convex_check(phi):
        tilde = derived_tilde(phi)
        pior_p5 = 0.0
        for x in _amostras(cen, "positive", "p5"):
            n = luxemburg_norm(A, x, phi).value
            pior_p5 = max(pior_p5, abs(luxemburg_norm(A, x @ x, tilde).value - n ** 2) / max(1.0, n ** 2))
        rel.registrar("orlicz.square_norm_identity", pior_p5 <= 1e-8, pior_p5)


def verificar_dsops(cen: Cenario, rel: RunReport) -> bool:
    A, T = cen.algebra, cen.operador
    cert = verify_ds(T, seed=cen.seed)
    ok = rel.registrar("dsops.verify_ds", cert.passed, cert.como_dict(),
                       detalhe=", ".join(cert.falhas()))
    if not ok:
        return False

    contracao = orlicz_contractivity(T, cen.phi, seed=cen.seed, n_samples=cen.config.params.n_samples)
    rel.registrar("dsops.orlicz_contractivity", contracao <= 1 + 1e-8, contracao)

    pior_kadison = np.inf
    for x in _amostras(cen, "hermitian", "kad"):
        pior_kadison = min(pior_kadison, kadison_check(T, x) / uniform_norm(x) ** 2)
    rel.registrar("dsops.kadison", pior_kadison >= -1e-9, pior_kadison)

    pior_recorrencia, anterior = 0.0, None
    for n, media, potencia in iterate_averages(T, cen.x, min(cen.config.horizon, 64)):
        if anterior is not None:
            erro = n * media - (n - 1) * anterior - potencia
            pior_recorrencia = max(pior_recorrencia, uniform_norm(erro))
        anterior = media
    rel.registrar("dsops.average_recurrence", pior_recorrencia <= 1e-9 * max(1.0, uniform_norm(cen.x)),
                  pior_recorrencia)
    return True


def verificar_maximal(cen: Cenario, rel: RunReport):
    A, T, phi = cen.algebra, cen.operador, cen.phi
    params = cen.config.params
    N = cen.config.horizon
    x = absolute(cen.x)

    nu = params.nu or 0.5 * max(uniform_norm(x), 1e-12)
    yeadon = yeadon_search(T, x, nu, N)
    rel.registrar("maximal.yeadon_sup", "sup_bound_violado" not in yeadon.flags, yeadon.sup_bound)
    rel.registrar("maximal.yeadon_trace", yeadon.trace_complement <= yeadon.parts["trace_bound"] + 1e-9,
                  {"trace_complement": yeadon.trace_complement, "bound": yeadon.parts["trace_bound"],
                   "ratio": yeadon.ratio},
                  asserted=A.is_commutative)

    wp = WitnessParams.from_proof(phi, params.epsilon, params.delta, N)
    norma = luxemburg_norm(A, x, phi).value
    x_b = x * (0.5 * wp.gamma / norma) if norma > 0 else x
    buem = buem_witness(T, phi, params.epsilon, params.delta, x_b, N)
    rel.registrar("maximal.buem", buem.passed, buem.como_dict())

    if two_convex_check(phi):
        tilde_params = WitnessParams.from_proof(derived_tilde(phi), params.epsilon, params.delta ** 2, N)
        x_u = x * (0.5 * np.sqrt(tilde_params.gamma) / norma) if norma > 0 else x
        uem = uem_witness(T, phi, params.epsilon, params.delta, x_u, N)
        rel.registrar("maximal.uem", uem.passed, uem.como_dict())

    if A.total_dimension <= 8:
        discordancias = 0
        for i, y in enumerate(_amostras(cen, "general", "nbhd")):
            eps = (i % 5 + 0.5) / 5 * A.trace_of_identity
            delta = (i % 7 + 0.5) / 7 * uniform_norm(y)
            if measure_nbhd_member(A, y, eps, delta).member != measure_nbhd_bruteforce(A, y, eps, delta):
                discordancias += 1
        rel.registrar("maximal.nbhd_oracle", discordancias == 0, discordancias)


def cmd_verify(cen: Cenario) -> RunReport:
    """Suíte completa de invariantes para um cenário."""
    rel = RunReport(scenario_id=cen.id, comando="verify", seed=cen.seed)
    verificar_algebra(cen, rel)
    verificar_symfunc(cen, rel)
    verificar_orlicz(cen, rel)
    if verificar_dsops(cen, rel):
        verificar_maximal(cen, rel)
    else:
        logger.warning(f"⚠️ [{cen.id}] operador sem certificado DS; checagens maximais puladas")
    rel.resumo = {"falhas": rel.falhas, "n_checks": len(rel.checks)}
    return rel

"""
CLI de experimentos do Orlicz Ergódico.

Uso:
    python src/cli.py verify --config cenarios/padrao.toml
    python src/cli.py ergodic --config cenarios/shift_d4.toml --out resultados --seed 7
    python src/cli.py maximal --scenarios "shift*" --jobs 4

Status de saída: 0 se todas as checagens afirmadas passam, 1 se alguma falha,
2 para erro de configuração ou de domínio.
"""
import os
import sys
import time
import logging
from fnmatch import fnmatch
from typing import Callable, Dict, List, Optional

import click
import pandas as pd
from joblib import Parallel, delayed

sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from config import DIR_CENARIOS, DIR_RESULTADOS, LOG_LEVEL, N_JOBS
from experimentos.cenarios import ScenarioConfig, carregar_cenarios, montar_cenario
from experimentos.rodadas import cmd_boyd, cmd_ergodic, cmd_maximal, cmd_norms
from experimentos.suite import cmd_verify
from modelos.erros import OrliczErro
from reports.data import RunReport
from reports.generator import gerar_relatorio
from utils import configurar_logging, salvar_csv

logger = logging.getLogger("OrliczErgodico")

SAIDA_OK, SAIDA_FALHA, SAIDA_ERRO = 0, 1, 2

COMANDOS: Dict[str, Callable] = {
    "verify": lambda cen, out: cmd_verify(cen),
    "ergodic": cmd_ergodic,
    "maximal": cmd_maximal,
    "boyd": cmd_boyd,
    "norms": cmd_norms,
}


def executar_cenario(comando: str, cfg: ScenarioConfig, out: str) -> RunReport:
    """
    Monta e roda um cenário; erros de domínio viram RunReport com erro preenchido.

    Args:
        comando: nome do subcomando
        cfg: cenário validado
        out: diretório de saída

    Returns:
        RunReport já gravado em <out>/<id>/<comando>_report.json
    """
    inicio = time.perf_counter()
    try:
        rel = COMANDOS[comando](montar_cenario(cfg), out)
    except OrliczErro as e:
        logger.error(f"❌ [{cfg.id}] {type(e).__name__}: {e}")
        rel = RunReport(scenario_id=cfg.id, comando=comando, seed=cfg.seed, erro=f"{type(e).__name__}: {e}")
    rel.wall_time = time.perf_counter() - inicio
    gerar_relatorio(rel, out)
    return rel


def _selecionar(cenarios: List[ScenarioConfig], filtro: Optional[str], seed: Optional[int]) -> List[ScenarioConfig]:
    if filtro:
        cenarios = [c for c in cenarios if fnmatch(c.id, filtro)]
    if seed is not None:
        cenarios = [c.model_copy(update={"seed": seed}) for c in cenarios]
    return cenarios


def _resumo(comando: str, relatorios: List[RunReport], out: str):
    tabela = pd.DataFrame([{
        "scenario_id": r.scenario_id,
        "seed": r.seed,
        "passou": r.passou,
        "n_checks": len(r.checks),
        "falhas": ";".join(r.falhas),
        "erro": r.erro or "",
    } for r in relatorios])
    salvar_csv(tabela, os.path.join(out, f"{comando}_resumo.csv"))


def rodar(comando: str, config: str, out: Optional[str], seed: Optional[int], filtro: Optional[str],
          jobs: int) -> int:
    """Roda um subcomando sobre todos os cenários selecionados e devolve o status de saída."""
    try:
        cenarios = _selecionar(carregar_cenarios(config), filtro, seed)
    except OrliczErro as e:
        logger.error(f"❌ Configuração inválida: {e}")
        return SAIDA_ERRO
    if not cenarios:
        logger.error(f"❌ Nenhum cenário corresponde ao filtro '{filtro}' em {config}")
        return SAIDA_ERRO

    # o diretório do arquivo vale só quando --out não foi passado
    destinos = [out or c.output.dir or DIR_RESULTADOS for c in cenarios]
    logger.info(f"📊 {comando}: {len(cenarios)} cenário(s), jobs={jobs}")

    relatorios = Parallel(n_jobs=jobs, prefer="threads")(
        delayed(executar_cenario)(comando, cfg, destino) for cfg, destino in zip(cenarios, destinos)
    )

    for destino in sorted(set(destinos)):
        _resumo(comando, [r for r, d in zip(relatorios, destinos) if d == destino], destino)

    if any(r.erro for r in relatorios):
        return SAIDA_ERRO
    if not all(r.passou for r in relatorios):
        return SAIDA_FALHA
    logger.info(f"✅ {comando}: todos os cenários passaram")
    return SAIDA_OK


def opcoes_comuns(f):
    f = click.option("--log-level", default=LOG_LEVEL, show_default=True, help="Nível de log.")(f)
    f = click.option("--jobs", type=int, default=N_JOBS, show_default=True,
                     help="Cenários executados em paralelo.")(f)
    f = click.option("--scenarios", "filtro", default=None, help="Filtro fnmatch sobre o id dos cenários.")(f)
    f = click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=None,
                     help="Sobrescreve a seed de todos os cenários.")(f)
    f = click.option("--out", type=click.Path(file_okay=False), default=None,
                     help=f"Diretório de saída (padrão: {DIR_RESULTADOS}).")(f)
    f = click.option("--config", type=click.Path(dir_okay=False),
                     default=os.path.join(DIR_CENARIOS, "padrao.toml"), show_default=True,
                     help="Arquivo TOML de cenários.")(f)
    return f


@click.group()
def cli():
    """Experimentos numéricos de espaços de Orlicz não comutativos e teoremas ergódicos."""


def _registrar_comando(nome: str, ajuda: str):
    @cli.command(name=nome, help=ajuda)
    @opcoes_comuns
    def _comando(config, out, seed, filtro, jobs, log_level):
        configurar_logging(log_level)
        sys.exit(rodar(nome, config, out, seed, filtro, jobs))
    return _comando


_registrar_comando("verify", "Suíte completa de invariantes (algebra, symfunc, orlicz, dsops, maximal).")
_registrar_comando("ergodic", "Médias ergódicas, limite e taxa de convergência (CSV + JSON).")
_registrar_comando("maximal", "Desigualdade maximal e testemunhas de equicontinuidade (JSON).")
_registrar_comando("boyd", "Estimativa dos índices de Boyd de L^Phi(0, inf) (CSV).")
_registrar_comando("norms", "Normas de Luxemburg pelos dois caminhos e truncamentos (CSV).")


if __name__ == "__main__":
    cli()

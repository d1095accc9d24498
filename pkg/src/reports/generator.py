import os
import logging
from typing import Optional

import pandas as pd

from reports.data import RunReport
from utils import salvar_csv, salvar_json

logger = logging.getLogger("Relatorios")


def diretorio_cenario(raiz: str, scenario_id: str) -> str:
    """Cada cenário escreve em <raiz>/<id>/."""
    caminho = os.path.join(raiz, scenario_id)
    os.makedirs(caminho, exist_ok=True)
    return caminho


def anexar_csv(report: RunReport, raiz: str, nome: str, df: pd.DataFrame) -> str:
    """
    Grava um CSV do cenário e registra o caminho relativo no relatório.

    Args:
        report: relatório da rodada
        raiz: diretório de saída (--out)
        nome: nome do arquivo sem extensão
        df: tabela a gravar

    Returns:
        caminho absoluto do arquivo gravado
    """
    caminho = os.path.join(diretorio_cenario(raiz, report.scenario_id), f"{nome}.csv")
    salvar_csv(df, caminho)
    report.artefatos.append(os.path.relpath(caminho, raiz))
    return caminho


def anexar_json(report: RunReport, raiz: str, nome: str, dado) -> str:
    caminho = os.path.join(diretorio_cenario(raiz, report.scenario_id), f"{nome}.json")
    salvar_json(dado, caminho)
    report.artefatos.append(os.path.relpath(caminho, raiz))
    return caminho


def gerar_relatorio(report: RunReport, raiz: str, nome: Optional[str] = None) -> str:
    """Grava o RunReport (sem wall time) em <raiz>/<id>/<comando>_report.json."""
    nome = nome or f"{report.comando}_report"
    caminho = os.path.join(diretorio_cenario(raiz, report.scenario_id), f"{nome}.json")
    salvar_json(report.como_dict(), caminho)
    if report.passou:
        logger.info(f"✅ {report.comando} [{report.scenario_id}] ok ({report.wall_time:.2f}s)")
    else:
        logger.error(f"❌ {report.comando} [{report.scenario_id}] falhou: {report.falhas or report.erro}")
    return caminho

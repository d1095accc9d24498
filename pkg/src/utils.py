# utils.py
import json
import os
import sys
import math
import logging
import tempfile
from datetime import datetime

import numpy as np
import pandas as pd

sys.path.append(os.path.dirname(os.path.abspath(__file__)))
from config import DIR_LOGS, LOG_LEVEL

logger = logging.getLogger("Utils")

FORMATO_LOG = '%(asctime)s - %(levelname)s - %(message)s'


def configurar_logging(nivel: str = LOG_LEVEL, arquivo: bool = True):
    """Configura o logging raiz uma única vez (stdout + arquivo diário em logs/)."""
    handlers = [logging.StreamHandler(sys.stdout)]
    if arquivo:
        os.makedirs(DIR_LOGS, exist_ok=True)
        nome_arquivo_log = f"{datetime.now().strftime('%Y-%m-%d')}_experimentos.log"
        handlers.append(logging.FileHandler(os.path.join(DIR_LOGS, nome_arquivo_log), encoding='utf-8'))
    logging.basicConfig(level=getattr(logging, str(nivel).upper(), logging.INFO),
                        format=FORMATO_LOG, handlers=handlers, force=True)


def gerador(seed: int, *rotulos) -> np.random.Generator:
    """
    Gerador baseado em contador (Philox) derivado da seed do cenário.

    Args:
        seed: seed de 64 bits do cenário
        rotulos: inteiros ou strings que separam fluxos independentes

    Returns:
        np.random.Generator determinístico
    """
    entropia = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for r in rotulos:
        if isinstance(r, str):
            entropia.append(int.from_bytes(r.encode("utf-8")[:8].ljust(8, b"\0"), "little"))
        else:
            entropia.append(int(r) & 0xFFFFFFFFFFFFFFFF)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropia)))


def _force_scalar(val):
    if val is None:
        return None
    if isinstance(val, np.ndarray) and val.size == 1:
        return val.item()
    return val


def sanitizar_dados(dado):
    """Converte tipos numpy/complexos em estruturas serializáveis em JSON."""
    try:
        if dado is None:
            return None

        if isinstance(dado, dict):
            return {str(k): sanitizar_dados(v) for k, v in dado.items()}

        if isinstance(dado, (list, tuple)):
            return [sanitizar_dados(x) for x in dado]

        if isinstance(dado, np.ndarray):
            if dado.ndim == 0:
                return sanitizar_dados(_force_scalar(dado))
            return [sanitizar_dados(x) for x in dado]

        if isinstance(dado, (pd.Series, pd.Index)):
            return [sanitizar_dados(x) for x in dado.tolist()]

        if isinstance(dado, (np.bool_, bool)):
            return bool(dado)
        if isinstance(dado, (np.integer, int)):
            return int(dado)
        if isinstance(dado, (complex, np.complexfloating)):
            return {"re": sanitizar_dados(dado.real), "im": sanitizar_dados(dado.imag)}
        if isinstance(dado, (np.floating, float)):
            val = float(dado)
            if math.isnan(val):
                return None
            if math.isinf(val):
                return "inf" if val > 0 else "-inf"
            return val

        if hasattr(dado, "como_dict"):
            return sanitizar_dados(dado.como_dict())
        if hasattr(dado, "model_dump"):
            return sanitizar_dados(dado.model_dump())

        return dado
    except Exception as e:
        logger.warning(f"Erro ao sanitizar dado {type(dado)}: {e}")
        return str(dado)


def _escrever_atomico(caminho: str, conteudo: str):
    diretorio = os.path.dirname(os.path.abspath(caminho))
    os.makedirs(diretorio, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=diretorio, prefix=".tmp_", suffix=os.path.basename(caminho))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(conteudo)
        os.replace(tmp, caminho)
    except Exception:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def salvar_json(dado, caminho: str) -> str:
    texto = json.dumps(sanitizar_dados(dado), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    _escrever_atomico(caminho, texto)
    logger.info(f"💾 JSON salvo em {caminho}")
    return caminho


def salvar_csv(df: pd.DataFrame, caminho: str) -> str:
    texto = df.to_csv(index=False, float_format="%.17g", lineterminator="\n")
    _escrever_atomico(caminho, texto)
    logger.info(f"💾 CSV salvo em {caminho} ({len(df)} linhas)")
    return caminho

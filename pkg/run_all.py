import subprocess
import sys
import time
import os
import glob
import logging
from datetime import datetime

DIR_RAIZ = os.path.dirname(os.path.abspath(__file__))
DIR_SRC = os.path.join(DIR_RAIZ, "src")
DIR_LOGS = os.path.join(DIR_RAIZ, "logs")
DIR_CENARIOS = os.path.join(DIR_RAIZ, "cenarios")
DIR_RESULTADOS = os.path.join(DIR_RAIZ, "resultados")

CLI = os.path.join(DIR_SRC, "cli.py")
PYTHON_EXEC = sys.executable

COMANDOS = ["verify", "norms", "boyd", "ergodic", "maximal"]

os.makedirs(DIR_LOGS, exist_ok=True)

nome_arquivo_log = f"{datetime.now().strftime('%Y-%m-%d')}_sistema.log"
caminho_log = os.path.join(DIR_LOGS, nome_arquivo_log)

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s',
    handlers=[
        logging.FileHandler(caminho_log, encoding='utf-8'),
        logging.StreamHandler(sys.stdout)
    ]
)
logger = logging.getLogger("OrliczErgodico")


def get_env_with_src():
    env = os.environ.copy()
    original_path = env.get("PYTHONPATH", "")
    env["PYTHONPATH"] = f"{DIR_SRC}{os.pathsep}{original_path}"
    env["PYTHONIOENCODING"] = "utf-8"
    return env


def run_comando(comando, arquivo_cenario, extra=None):
    """Roda um subcomando do CLI como subprocesso; devolve o código de saída."""
    descricao = f"{comando} [{os.path.basename(arquivo_cenario)}]"
    inicio = time.time()
    logger.info(f"▶️ INICIANDO: {descricao}")

    args = [PYTHON_EXEC, CLI, comando, "--config", arquivo_cenario, "--out", DIR_RESULTADOS]
    resultado = subprocess.run(args + list(extra or []), env=get_env_with_src(), cwd=DIR_RAIZ)

    duracao = round(time.time() - inicio, 2)
    if resultado.returncode == 0:
        logger.info(f"✅ SUCESSO: {descricao} ({duracao}s)")
    elif resultado.returncode == 1:
        logger.warning(f"⚠️ CHECAGENS FALHARAM: {descricao} ({duracao}s)")
    else:
        logger.error(f"❌ ERRO: {descricao} (Código {resultado.returncode})")
    return resultado.returncode


def main():
    print("\n" + "=" * 60)
    print("📐 ORLICZ ERGÓDICO - BATERIA DE EXPERIMENTOS")
    print("=" * 60 + "\n")

    arquivos = sorted(glob.glob(os.path.join(DIR_CENARIOS, "*.toml")))
    if not arquivos:
        logger.error(f"❌ Nenhum cenário encontrado em {DIR_CENARIOS}")
        sys.exit(2)

    extra = sys.argv[1:]
    codigos = {}
    for arquivo in arquivos:
        for comando in COMANDOS:
            codigos[(os.path.basename(arquivo), comando)] = run_comando(comando, arquivo, extra)

    falhas = {k: v for k, v in codigos.items() if v != 0}
    print("\n" + "=" * 60)
    if not falhas:
        print(f"✅ {len(codigos)} rodadas concluídas sem falhas")
        print(f"📂 Resultados em {DIR_RESULTADOS}")
    else:
        for (arquivo, comando), codigo in sorted(falhas.items()):
            print(f"❌ {comando} [{arquivo}] -> código {codigo}")
    print("=" * 60 + "\n")
    sys.exit(max(codigos.values()))


if __name__ == "__main__":
    main()

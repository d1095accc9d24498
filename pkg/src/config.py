import os
from dotenv import load_dotenv

DIR_SRC = os.path.dirname(os.path.abspath(__file__))
DIR_RAIZ = os.path.dirname(DIR_SRC)

path_env = os.path.join(DIR_RAIZ, '.env')
load_dotenv(path_env)

DIR_CENARIOS = os.getenv("DIR_CENARIOS", os.path.join(DIR_RAIZ, "cenarios"))
DIR_RESULTADOS = os.getenv("DIR_RESULTADOS", os.path.join(DIR_RAIZ, "resultados"))
DIR_LOGS = os.getenv("DIR_LOGS", os.path.join(DIR_RAIZ, "logs"))

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")

# Execução
N_JOBS = int(os.getenv("N_JOBS", "1"))
SEED_PADRAO = int(os.getenv("SEED_PADRAO", "20160131"))

# Tolerâncias numéricas
TOL_AUTOVALOR = float(os.getenv("TOL_AUTOVALOR", "1e-9"))
TOL_PSD = float(os.getenv("TOL_PSD", "1e-9"))
TOL_BISSECAO = float(os.getenv("TOL_BISSECAO", "1e-12"))
MAX_ITER_BISSECAO = int(os.getenv("MAX_ITER_BISSECAO", "200"))
TOL_PONTO_FIXO = float(os.getenv("TOL_PONTO_FIXO", "1e-8"))
GAP_ESPECTRAL_MIN = float(os.getenv("GAP_ESPECTRAL_MIN", "1e-6"))

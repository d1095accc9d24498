"""
Funções de Orlicz, certificados de crescimento e normas de Luxemburg.

A norma é calculada por bissecção no parâmetro de escala a, usando que o
modular a -> tau(Phi(|x|/a)) é não crescente. O mesmo núcleo atende o caminho
matricial (autovalores de |x| com pesos de traço) e o caminho comutativo
(peças de uma StepFunction).
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from config import MAX_ITER_BISSECAO, TOL_BISSECAO
from modelos.algebra import (AlgElement, TracedAlgebra, absolute, apply_function,
                             checar_pertence, trace)
from modelos.erros import ErroConsistencia, ErroDominio, ErroNumerico
from modelos.symfunc import StepFunction

logger = logging.getLogger("Orlicz")

TIPOS_ORLICZ = ("power", "power_over_p", "log_power", "piecewise_linear", "tilde")
TOL_CONVEXIDADE = 1e-10
RTOL_BRENTQ = 4 * np.finfo(float).eps
MAX_DOBRAS = 2200


def grade_padrao(n: int = 64) -> np.ndarray:
    return np.geomspace(1e-4, 1e4, n)


def _saida(arr):
    arr = np.asarray(arr, dtype=float)
    return float(arr) if arr.ndim == 0 else arr


@dataclass(frozen=True, eq=False)
class OrliczFunction:
    """
    Função de Orlicz Phi: [0, inf) -> [0, inf), convexa, Phi(0) = 0 e Phi > 0 fora de 0.

    Use os construtores power, power_over_p, log_power, piecewise_linear ou
    derived_tilde em vez de instanciar diretamente.
    """

    kind: str
    p: Optional[float] = None
    alpha: Optional[float] = None
    knots: Optional[Tuple[Tuple[float, float], ...]] = None
    base: Optional["OrliczFunction"] = None

    def __post_init__(self):
        if self.kind not in TIPOS_ORLICZ:
            raise ErroDominio(f"tipo de função de Orlicz desconhecido: {self.kind}")
        if self.kind in ("power", "power_over_p"):
            if self.p is None or not self.p >= 1:
                raise ErroDominio(f"{self.kind} exige p >= 1 (recebido {self.p})")
        elif self.kind == "log_power":
            if self.alpha is None or not self.alpha >= 0:
                raise ErroDominio(f"log_power exige alpha >= 0 (recebido {self.alpha})")
        elif self.kind == "piecewise_linear":
            self._validar_nos()
        elif self.base is None:
            raise ErroDominio("tilde exige a função base")

    def _validar_nos(self):
        nos = np.asarray(self.knots, dtype=float)
        if nos.ndim != 2 or nos.shape[1] != 2 or nos.shape[0] < 2:
            raise ErroDominio("knots deve ser uma lista de pares (u, Phi(u)) com ao menos 2 nós")
        if nos[0, 0] != 0 or nos[0, 1] != 0:
            raise ErroDominio("o primeiro nó precisa ser (0, 0)")
        du, dv = np.diff(nos[:, 0]), np.diff(nos[:, 1])
        if np.any(du <= 0) or np.any(dv <= 0):
            raise ErroDominio("nós precisam ser estritamente crescentes em u e em Phi(u)")
        inclinacoes = dv / du
        if np.any(np.diff(inclinacoes) < -TOL_CONVEXIDADE * inclinacoes[:-1]):
            raise ErroDominio("inclinações decrescentes: a função linear por partes não é convexa")

    # Construtores
    @classmethod
    def power(cls, p: float) -> "OrliczFunction":
        return cls("power", p=float(p))

    @classmethod
    def power_over_p(cls, p: float) -> "OrliczFunction":
        return cls("power_over_p", p=float(p))

    @classmethod
    def log_power(cls, alpha: float) -> "OrliczFunction":
        return cls("log_power", alpha=float(alpha))

    @classmethod
    def piecewise_linear(cls, knots: Sequence[Sequence[float]]) -> "OrliczFunction":
        return cls("piecewise_linear", knots=tuple((float(u), float(v)) for u, v in knots))

    @property
    def descricao(self) -> str:
        if self.kind == "power":
            return f"u^{self.p:g}"
        if self.kind == "power_over_p":
            return f"u^{self.p:g}/{self.p:g}"
        if self.kind == "log_power":
            return f"u*ln^{self.alpha:g}(e+u)"
        if self.kind == "piecewise_linear":
            return f"piecewise{list(self.knots)}"
        return f"({self.base.descricao})(sqrt u)"

    # Avaliação
    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "power":
            return _saida(np.power(u, self.p))
        if self.kind == "power_over_p":
            return _saida(np.power(u, self.p) / self.p)
        if self.kind == "log_power":
            return _saida(u * np.power(np.log(np.e + u), self.alpha))
        if self.kind == "piecewise_linear":
            nos = np.asarray(self.knots)
            inclinacao = (nos[-1, 1] - nos[-2, 1]) / (nos[-1, 0] - nos[-2, 0])
            dentro = np.interp(u, nos[:, 0], nos[:, 1])
            fora = nos[-1, 1] + inclinacao * (u - nos[-1, 0])
            return _saida(np.where(u > nos[-1, 0], fora, dentro))
        return _saida(self.base(np.sqrt(u)))

    def inverse(self, v):
        """Phi^{-1}: forma fechada quando existe, senão brentq num intervalo dobrado."""
        v = np.asarray(v, dtype=float)
        if np.any(v < 0):
            raise ErroDominio("Phi^{-1} definida só para v >= 0")
        if self.kind == "power":
            return _saida(np.power(v, 1.0 / self.p))
        if self.kind == "power_over_p":
            return _saida(np.power(self.p * v, 1.0 / self.p))
        if self.kind == "piecewise_linear":
            nos = np.asarray(self.knots)
            inclinacao = (nos[-1, 1] - nos[-2, 1]) / (nos[-1, 0] - nos[-2, 0])
            dentro = np.interp(v, nos[:, 1], nos[:, 0])
            fora = nos[-1, 0] + (v - nos[-1, 1]) / inclinacao
            return _saida(np.where(v > nos[-1, 1], fora, dentro))
        if self.kind == "tilde":
            return _saida(np.power(self.base.inverse(v), 2))
        return _saida(np.vectorize(self._inverso_numerico, otypes=[float])(v))

    def _inverso_numerico(self, v: float) -> float:
        if v == 0:
            return 0.0
        lo = hi = 1.0
        passos = 0
        if self(hi) < v:
            while self(hi) < v:
                hi *= 2.0
                passos += 1
                if passos > MAX_DOBRAS:
                    raise ErroNumerico(f"Phi^{{-1}}({v}) sem intervalo após {MAX_DOBRAS} dobras")
            lo = hi / 2.0
        else:
            while self(lo) > v:
                lo /= 2.0
                passos += 1
                if passos > MAX_DOBRAS:
                    raise ErroNumerico(f"Phi^{{-1}}({v}) sem intervalo após {MAX_DOBRAS} divisões")
            hi = lo * 2.0
        return float(brentq(lambda u: self(u) - v, lo, hi, xtol=1e-300, rtol=RTOL_BRENTQ, maxiter=500))

    @property
    def doubling_constant(self) -> Optional[float]:
        """Constante global declarada c com Phi(2u) <= c Phi(u), quando conhecida."""
        if self.kind in ("power", "power_over_p"):
            return 2.0 ** self.p
        if self.kind == "log_power":
            return 2.0 ** (1.0 + self.alpha)
        if self.kind == "tilde":
            return self.base.doubling_constant
        return None

    def is_convex(self, grid: Optional[np.ndarray] = None) -> bool:
        return _convexa_no_ponto_medio(self, grade_padrao() if grid is None else grid)

    def verificar(self, grid: Optional[np.ndarray] = None) -> dict:
        """Certificados amostrais: Phi(0)=0, crescimento, convexidade, inversa e doubling."""
        grid = grade_padrao() if grid is None else np.asarray(grid, dtype=float)
        valores = np.asarray(self(grid))
        ida_volta = np.asarray(self.inverse(valores))
        erro_inversa = float(np.max(np.abs(ida_volta - grid) / np.maximum(1.0, grid)))
        cert = {
            "phi": self.descricao,
            "phi_zero": float(self(0.0)) == 0.0,
            "crescente": bool(np.all(np.diff(valores) > 0)),
            "convexa": self.is_convex(grid),
            "erro_inversa": erro_inversa,
            "inversa_ok": erro_inversa <= 1e-8,
            "dois_convexa": two_convex_check(self, grid),
            "doubling_declarado": self.doubling_constant,
            "doubling_observado": delta2_sup(self, (float(grid[0]), float(grid[-1])), grid.size),
        }
        cert["ok"] = cert["phi_zero"] and cert["crescente"] and cert["convexa"] and cert["inversa_ok"]
        return cert

    def como_dict(self) -> dict:
        return {"kind": self.kind, "p": self.p, "alpha": self.alpha,
                "knots": [list(k) for k in self.knots] if self.knots else None,
                "descricao": self.descricao}


def _convexa_no_ponto_medio(f, grid) -> bool:
    grid = np.asarray(grid, dtype=float)
    a, b = np.meshgrid(grid, grid)
    meio = np.asarray(f((a + b) / 2))
    media = (np.asarray(f(a)) + np.asarray(f(b))) / 2
    return bool(np.all(meio <= media * (1 + TOL_CONVEXIDADE) + 1e-300))


@dataclass(frozen=True)
class NormResult:
    value: float
    bracket: Tuple[float, float]
    modular_at_value: float

    def como_dict(self) -> dict:
        return {"value": self.value, "bracket": list(self.bracket), "modular_at_value": self.modular_at_value}


def lemma_constant(phi: OrliczFunction, delta: float) -> float:
    """
    t = delta / Phi(delta), de modo que t Phi(u) >= u para todo u >= delta.

    Vale porque Phi(u)/u é não decrescente para Phi convexa com Phi(0) = 0;
    a desigualdade é conferida numa grade u em [delta, 1e4 delta].
    """
    if delta <= 0:
        raise ErroDominio(f"delta precisa ser > 0 (recebido {delta})")
    phi_delta = float(phi(delta))
    if phi_delta <= 1e-300:
        raise ErroDominio(f"Phi({delta}) = 0: Phi não é positiva fora de 0")
    t = delta / phi_delta
    u = np.geomspace(delta, 1e4 * delta, 200)
    folga = t * np.asarray(phi(u)) - u
    if np.any(folga < -1e-12 * u):
        raise ErroConsistencia(f"t Phi(u) >= u falhou na grade para delta={delta}, t={t}")
    return t


def delta2_sup(phi: OrliczFunction, u_range: Tuple[float, float] = (1e-8, 1e8), grid_size: int = 512) -> float:
    """max de Phi(2u)/Phi(u) na grade; certificado só para a faixa testada."""
    u_lo, u_hi = u_range
    if not 0 < u_lo < u_hi:
        raise ErroDominio(f"faixa inválida para delta2: {u_range}")
    u = np.geomspace(u_lo, u_hi, grid_size)
    return float(np.max(np.asarray(phi(2 * u)) / np.asarray(phi(u))))


def two_convex_check(phi: OrliczFunction, grid: Optional[np.ndarray] = None) -> bool:
    """Convexidade no ponto médio de u -> Phi(sqrt u)."""
    grid = grade_padrao() if grid is None else grid
    return _convexa_no_ponto_medio(lambda u: phi(np.sqrt(u)), grid)


def derived_tilde(phi: OrliczFunction) -> OrliczFunction:
    """Phi~(u) = Phi(sqrt u), definida só para Phi 2-convexa."""
    if not two_convex_check(phi):
        raise ErroDominio(f"{phi.descricao} não é 2-convexa")
    return OrliczFunction("tilde", base=phi)


def modular(A: TracedAlgebra, x: AlgElement, phi: OrliczFunction) -> float:
    """tau(Phi(|x|))."""
    checar_pertence(A, x)
    return float(trace(A, apply_function(phi, absolute(x))).real)


def _luxemburg(valores: np.ndarray, pesos: np.ndarray, phi: OrliczFunction) -> NormResult:
    valores = np.asarray(valores, dtype=float)
    pesos = np.asarray(pesos, dtype=float)
    vivos = valores > 0
    valores, pesos = valores[vivos], pesos[vivos]
    if valores.size == 0:
        return NormResult(0.0, (0.0, 0.0), 0.0)

    def mod(a):
        return float(np.sum(pesos * np.asarray(phi(valores / a))))

    a0 = float(valores.max()) / float(phi.inverse(1.0))
    lo = hi = a0
    passos = 0
    if mod(hi) > 1:
        while mod(hi) > 1:
            lo, hi = hi, hi * 2
            passos += 1
            if passos > MAX_ITER_BISSECAO:
                raise ErroNumerico(f"intervalo da bissecção não encontrado após {passos} dobras")
    else:
        while mod(lo) <= 1:
            hi, lo = lo, lo / 2
            passos += 1
            if passos > MAX_ITER_BISSECAO:
                raise ErroNumerico(f"intervalo da bissecção não encontrado após {passos} divisões")

    for _ in range(MAX_ITER_BISSECAO):
        if hi - lo <= TOL_BISSECAO * hi:
            break
        meio = (lo + hi) / 2
        if mod(meio) <= 1:
            hi = meio
        else:
            lo = meio
    else:
        logger.warning(f"⚠️ Bissecção atingiu {MAX_ITER_BISSECAO} iterações (largura {hi - lo:.3e})")

    return NormResult(value=hi, bracket=(lo, hi), modular_at_value=mod(hi))


def luxemburg_norm(A: TracedAlgebra, x: AlgElement, phi: OrliczFunction) -> NormResult:
    """
    ||x||_Phi = inf{a > 0 : tau(Phi(|x|/a)) <= 1}.

    O modular é avaliado pelos autovalores de |x| em cada bloco, com peso w_j.
    """
    checar_pertence(A, x)
    modulo = absolute(x)
    valores, pesos = [], []
    for w, b in zip(A.weights, modulo.data):
        lam = np.clip(np.linalg.eigvalsh(b), 0.0, None)
        valores.append(lam)
        pesos.append(np.full(lam.size, w))
    return _luxemburg(np.concatenate(valores), np.concatenate(pesos), phi)


def luxemburg_norm_sf(f: StepFunction, phi: OrliczFunction) -> NormResult:
    """Mesma bissecção com int Phi(f/a) dt como modular."""
    return _luxemburg(f.values, f.lengths, phi)


def modular_bound_check(A: TracedAlgebra, x: AlgElement, phi: OrliczFunction) -> bool:
    """
    tau(Phi(|x|)) <= ||x||_Phi na bola unitária de L^Phi.

    Raises:
        ErroDominio: se ||x||_Phi > 1
    """
    norma = luxemburg_norm(A, x, phi)
    if norma.value > 1 + 1e-10:
        raise ErroDominio(f"cota do modular exige ||x||_Phi <= 1 (obtido {norma.value:.6g})")
    return modular(A, x, phi) <= norma.value + 1e-9


def orlicz_from_config(kind: str, p: Optional[float] = None, alpha: Optional[float] = None,
                       knots: Optional[Sequence[Sequence[float]]] = None) -> OrliczFunction:
    """Traduz a seção [orlicz] de um cenário."""
    if kind == "power":
        return OrliczFunction.power(p)
    if kind == "power_over_p":
        return OrliczFunction.power_over_p(p)
    if kind == "log_power":
        return OrliczFunction.log_power(alpha if alpha is not None else 1.0)
    if kind in ("piecewise", "piecewise_linear"):
        return OrliczFunction.piecewise_linear(knots or [])
    raise ErroDominio(f"orlicz.kind desconhecido: {kind}")

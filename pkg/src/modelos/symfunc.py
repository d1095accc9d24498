"""
Backend comutativo: funções escada não crescentes em (0, inf).

Aqui vivem a função de valores singulares generalizados mu_t(x), a
majorização de Hardy-Littlewood, o operador de dilatação D_s e o estimador
dos índices de Boyd via função fundamental.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from modelos.algebra import AlgElement, TracedAlgebra, checar_pertence
from modelos.erros import ErroDominio

logger = logging.getLogger("SymFunc")

# Valores vizinhos que diferem menos que isso (relativo) viram uma só peça
TOL_FUSAO = 1e-12
TOL_MAJORIZACAO = 1e-10


@dataclass(frozen=True, eq=False)
class StepFunction:
    """
    Função escada não crescente e contínua à direita em (0, inf).

    Guarda apenas as peças finitas (valor > 0, comprimento > 0); depois da
    última peça a função vale 0 até o infinito.
    """

    values: np.ndarray
    lengths: np.ndarray

    def __post_init__(self):
        valores = np.asarray(self.values, dtype=float).ravel()
        comprimentos = np.asarray(self.lengths, dtype=float).ravel()
        if valores.size != comprimentos.size:
            raise ErroDominio("values e lengths com tamanhos diferentes")
        if np.any(valores < 0) or np.any(~np.isfinite(valores)):
            raise ErroDominio("valores de uma StepFunction devem ser finitos e >= 0")
        if np.any(comprimentos < 0) or np.any(~np.isfinite(comprimentos)):
            raise ErroDominio("peças finitas precisam de comprimento finito >= 0")
        valores, comprimentos = _normalizar(valores, comprimentos)
        valores.setflags(write=False)
        comprimentos.setflags(write=False)
        object.__setattr__(self, "values", valores)
        object.__setattr__(self, "lengths", comprimentos)

    @classmethod
    def from_pieces(cls, pieces: Iterable[Tuple[float, Optional[float]]]) -> "StepFunction":
        """
        Constrói a partir de pares (valor, comprimento); comprimento None ou inf
        só é aceito na última peça e com valor 0.
        """
        pieces = list(pieces)
        valores, comprimentos = [], []
        for i, (v, l) in enumerate(pieces):
            if l is None or np.isinf(l):
                if i != len(pieces) - 1:
                    raise ErroDominio("peça de comprimento infinito só pode ser a última")
                if v != 0:
                    raise ErroDominio("peça infinita precisa ter valor 0")
                continue
            valores.append(float(v))
            comprimentos.append(float(l))
        return cls(np.array(valores), np.array(comprimentos))

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls(np.array([]), np.array([]))

    @property
    def breakpoints(self) -> np.ndarray:
        return np.cumsum(self.lengths)

    @property
    def support_length(self) -> float:
        return float(np.sum(self.lengths))

    @property
    def pieces(self) -> List[Tuple[float, Optional[float]]]:
        return [(float(v), float(l)) for v, l in zip(self.values, self.lengths)] + [(0.0, None)]

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.breakpoints, t, side="right")
        estendido = np.append(self.values, 0.0)
        return estendido[idx]

    def map_values(self, phi: Callable) -> "StepFunction":
        """phi aplicado peça a peça; phi deve ser não decrescente com phi(0) = 0."""
        return StepFunction(np.asarray(phi(self.values), dtype=float), self.lengths)

    def scale(self, c: float) -> "StepFunction":
        if c < 0:
            raise ErroDominio("escala negativa quebra a monotonicidade")
        return StepFunction(c * self.values, self.lengths)

    def isclose(self, outra: "StepFunction", atol: float = 1e-9) -> bool:
        """Compara nos intervalos da partição comum."""
        pontos = np.union1d(self.breakpoints, outra.breakpoints)
        if pontos.size == 0:
            return True
        inicios = np.concatenate([[0.0], pontos])
        return bool(np.all(np.abs(self(inicios) - outra(inicios)) <= atol))

    def to_json(self) -> List[dict]:
        return [{"value": v, "length": l} for v, l in self.pieces]

    @classmethod
    def from_json(cls, dado: Sequence[dict]) -> "StepFunction":
        return cls.from_pieces((p["value"], p["length"]) for p in dado)

    def __repr__(self):
        return f"StepFunction({self.pieces})"


def _normalizar(valores: np.ndarray, comprimentos: np.ndarray):
    vivos = comprimentos > 0
    valores, comprimentos = valores[vivos], comprimentos[vivos]
    if valores.size > 1 and np.any(np.diff(valores) > TOL_FUSAO * max(1.0, float(valores.max()))):
        raise ErroDominio("StepFunction precisa ser não crescente")
    positivos = valores > 0
    valores, comprimentos = valores[positivos], comprimentos[positivos]

    novos_v, novos_l = [], []
    for v, l in zip(valores, comprimentos):
        if novos_v and abs(novos_v[-1] - v) <= TOL_FUSAO * max(1.0, novos_v[-1]):
            massa = novos_v[-1] * novos_l[-1] + v * l
            novos_l[-1] += l
            novos_v[-1] = massa / novos_l[-1]
        else:
            novos_v.append(float(v))
            novos_l.append(float(l))
    return np.array(novos_v, dtype=float), np.array(novos_l, dtype=float)


def singular_value_function(A: TracedAlgebra, x: AlgElement) -> StepFunction:
    """
    mu_t(x): rearranjo decrescente dos valores singulares de x, onde cada
    valor singular do bloco j ocupa um intervalo de comprimento w_j.
    """
    checar_pertence(A, x)
    valores, comprimentos = [], []
    for w, b in zip(A.weights, x.data):
        s = np.linalg.svd(b, compute_uv=False)
        valores.append(s)
        comprimentos.append(np.full(s.size, w))
    valores = np.concatenate(valores)
    comprimentos = np.concatenate(comprimentos)

    topo = float(valores.max()) if valores.size else 0.0
    valores = np.where(valores <= TOL_FUSAO * topo, 0.0, valores)
    ordem = np.argsort(-valores, kind="stable")
    return StepFunction(valores[ordem], comprimentos[ordem])


def sf_integral(f: StepFunction, upper: float = np.inf) -> float:
    """int_0^upper f(t) dt, soma exata por peças."""
    if upper < 0:
        raise ErroDominio("limite superior negativo")
    if np.isinf(upper):
        return float(np.sum(f.values * f.lengths))
    inicios = f.breakpoints - f.lengths
    cobertos = np.clip(upper - inicios, 0.0, f.lengths)
    return float(np.sum(f.values * cobertos))


def majorizes(x_sf: StepFunction, y_sf: StepFunction, atol: float = TOL_MAJORIZACAO) -> bool:
    """
    True se int_0^s mu(y) <= int_0^s mu(x) para todo s > 0.

    As integrais são lineares por partes, então basta checar nos pontos de
    quebra das duas funções.
    """
    pontos = np.union1d(x_sf.breakpoints, y_sf.breakpoints)
    for s in pontos:
        if sf_integral(y_sf, s) > sf_integral(x_sf, s) + atol:
            return False
    return True


def dilate(f: StepFunction, s: float) -> StepFunction:
    """D_s f(t) = f(t/s)."""
    if s <= 0:
        raise ErroDominio(f"dilatação exige s > 0 (recebido {s})")
    return StepFunction(f.values, f.lengths * s)


def fundamental_function(phi, t):
    """phi_E(t) = ||chi_(0,t)||_Phi = 1 / Phi^{-1}(1/t)."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ErroDominio("função fundamental definida só para t > 0")
    return 1.0 / np.asarray(phi.inverse(1.0 / t), dtype=float)


def escala_padrao() -> np.ndarray:
    return np.array([2.0 ** k for k in range(-10, 11) if k != 0])


@dataclass
class BoydEstimate:
    s_grid: np.ndarray
    dilation_norm_lower: np.ndarray
    p_hat: float
    q_hat: float
    b_grid: np.ndarray = field(repr=False, default_factory=lambda: np.array([]))

    @property
    def local_index(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            idx = np.log(self.s_grid) / np.log(self.dilation_norm_lower)
        return np.where(np.isfinite(idx), idx, np.nan)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "s": self.s_grid,
            "dilation_norm_lower": self.dilation_norm_lower,
            "local_index": self.local_index,
        })

    def como_dict(self) -> dict:
        return {
            "p_hat": self.p_hat,
            "q_hat": self.q_hat,
            "s_min": float(self.s_grid.min()),
            "s_max": float(self.s_grid.max()),
        }


def _cobre_faixas(s_grid: np.ndarray) -> bool:
    """Pontos nas duas pontas de cada faixa: s <= 2^-10 e 1/2 <= s < 1; 1 < s <= 2 e s >= 2^10."""
    abaixo = s_grid[s_grid < 1]
    acima = s_grid[s_grid > 1]
    if abaixo.size == 0 or acima.size == 0:
        return False
    return (abaixo.min() <= 2.0 ** -10 and abaixo.max() >= 0.5
            and acima.min() <= 2.0 and acima.max() >= 2.0 ** 10)


def boyd_estimate(phi, s_grid: Optional[Sequence[float]] = None,
                  b_grid: Optional[Sequence[float]] = None) -> BoydEstimate:
    """
    Estima os índices de Boyd de L^Phi(0, inf) pela família de funções
    características chi_(0,b).

    ||D_s|| >= sup_b phi_E(s b) / phi_E(b). p_hat vem do maior s e q_hat do
    menor; como a norma é subestimada, p_hat é cota superior para p_E.
    Os valores são os da grade, sem extrapolação.

    Raises:
        ErroDominio: se a grade não cobre [2, 2^10] e [2^-10, 1/2], ou se Phi
            não é invertível
    """
    s_grid = escala_padrao() if s_grid is None else np.sort(np.asarray(s_grid, dtype=float))
    if np.any(s_grid <= 0):
        raise ErroDominio("escalas de dilatação devem ser > 0")
    if not _cobre_faixas(s_grid):
        raise ErroDominio("grade de escalas precisa cobrir [2^-10, 1/2] e [2, 2^10]")
    if b_grid is None:
        b_grid = 2.0 ** np.arange(-40, 40.5, 0.5)
    b_grid = np.asarray(b_grid, dtype=float)

    try:
        base = fundamental_function(phi, b_grid)
    except (ValueError, ArithmeticError) as e:
        raise ErroDominio(f"Phi não invertível na grade de Boyd: {e}") from e

    cotas = []
    for s in s_grid:
        razoes = fundamental_function(phi, s * b_grid) / base
        cotas.append(float(np.max(razoes)))
    cotas = np.array(cotas)

    p_hat = float(np.log(s_grid[-1]) / np.log(cotas[-1]))
    q_hat = float(np.log(s_grid[0]) / np.log(cotas[0]))
    logger.info(f"📊 Boyd: p_hat={p_hat:.4f}, q_hat={q_hat:.4f}")
    return BoydEstimate(s_grid=s_grid, dilation_norm_lower=cotas, p_hat=p_hat, q_hat=q_hat, b_grid=b_grid)

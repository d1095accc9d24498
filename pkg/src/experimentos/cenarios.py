"""
Cenários de experimento: leitura dos arquivos TOML, validação com pydantic e
montagem dos objetos (álgebra, Phi, operador, elemento).
"""
import os
import sys
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
import toml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from config import SEED_PADRAO
from modelos.algebra import AlgElement, TracedAlgebra, random_element, random_unitary
from modelos.dsops import (DSOperator, compose, convex_combine, from_schur_correlation,
                           from_substochastic, from_unitary_conjugation)
from modelos.erros import ErroDominio, OrliczErro
from modelos.orlicz import OrliczFunction, luxemburg_norm, orlicz_from_config
from utils import gerador

logger = logging.getLogger("Cenarios")

TIPOS_OPERADOR = ("identity", "unitary", "schur", "substochastic", "compose", "mix")
PRESETS_SUBESTOCASTICOS = ("shift", "averaging", "lazy_shift", "random")


class ErroCenario(OrliczErro):
    """Arquivo de cenário ilegível ou inválido."""


class _Secao(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SecaoOrlicz(_Secao):
    kind: Literal["power", "power_over_p", "log_power", "piecewise", "piecewise_linear"] = "power"
    p: Optional[float] = 2.0
    alpha: Optional[float] = None
    knots: Optional[List[Tuple[float, float]]] = None


class SecaoOperador(_Secao):
    kind: Literal["identity", "unitary", "schur", "substochastic", "compose", "mix"] = "identity"
    seed: Optional[int] = None
    params: Dict[str, Any] = Field(default_factory=dict)


class SecaoElemento(_Secao):
    kind: Literal["general", "hermitian", "positive", "projection", "diagonal", "blocks"] = "positive"
    seed: Optional[int] = None
    rescale_to_norm: Optional[float] = Field(default=None, gt=0)
    diagonal: Optional[List[float]] = None
    blocks: Optional[List[List[List[float]]]] = None


class SecaoParams(_Secao):
    epsilon: float = Field(default=0.5, gt=0)
    delta: float = Field(default=1.0, gt=0)
    nu: Optional[float] = Field(default=None, gt=0)
    n_samples: int = Field(default=20, ge=1)


class SecaoSaida(_Secao):
    dir: Optional[str] = None


class ScenarioConfig(_Secao):
    """Um cenário completo; chaves desconhecidas são rejeitadas."""

    id: str
    seed: int = Field(default=SEED_PADRAO, ge=0, lt=2 ** 64)
    horizon: int = Field(default=256, ge=1, le=10_000)
    algebra: List[Tuple[int, float]]
    orlicz: SecaoOrlicz = Field(default_factory=SecaoOrlicz)
    operator: SecaoOperador = Field(default_factory=SecaoOperador)
    element: SecaoElemento = Field(default_factory=SecaoElemento)
    params: SecaoParams = Field(default_factory=SecaoParams)
    output: SecaoSaida = Field(default_factory=SecaoSaida)

    @field_validator("algebra")
    @classmethod
    def _algebra_valida(cls, v):
        if not v:
            raise ValueError("algebra precisa de ao menos um bloco [dim, peso]")
        for d, w in v:
            if d < 1 or w <= 0:
                raise ValueError(f"bloco inválido [{d}, {w}]: dim >= 1 e peso > 0")
        return v


@dataclass
class Cenario:
    """Objetos montados a partir de um ScenarioConfig."""

    config: ScenarioConfig
    algebra: TracedAlgebra
    phi: OrliczFunction
    operador: DSOperator
    x: AlgElement

    @property
    def id(self) -> str:
        return self.config.id

    @property
    def seed(self) -> int:
        return self.config.seed


def _formatar_validacao(e: ValidationError) -> str:
    partes = []
    for erro in e.errors():
        caminho = ".".join(str(p) for p in erro["loc"])
        partes.append(f"{caminho}: {erro['msg']}")
    return "; ".join(partes)


def carregar_cenarios(caminho: str) -> List[ScenarioConfig]:
    """
    Lê um arquivo TOML com um cenário (chaves no topo) ou vários ([[scenarios]]).

    Raises:
        ErroCenario: arquivo ausente, TOML inválido (com linha) ou chave inválida
    """
    if not os.path.exists(caminho):
        raise ErroCenario(f"arquivo de cenário não encontrado: {caminho}")
    try:
        dados = toml.load(caminho)
    except toml.TomlDecodeError as e:
        raise ErroCenario(f"{caminho}, linha {e.lineno}: {e.msg}") from e

    brutos = dados.get("scenarios") if "scenarios" in dados else [dados]
    if not isinstance(brutos, list):
        raise ErroCenario(f"{caminho}: 'scenarios' precisa ser uma lista de tabelas")

    cenarios = []
    for i, bruto in enumerate(brutos):
        try:
            cenarios.append(ScenarioConfig.model_validate(bruto))
        except ValidationError as e:
            raise ErroCenario(f"{caminho}, cenário {i}: {_formatar_validacao(e)}") from e
    logger.info(f"📂 {len(cenarios)} cenário(s) carregado(s) de {os.path.basename(caminho)}")
    return cenarios


def derivar_seed(seed: int, *rotulos) -> int:
    return int(gerador(seed, *rotulos).integers(0, 2 ** 62))


def _ajustar_aos_pesos(M: np.ndarray, pesos: np.ndarray) -> np.ndarray:
    """
    S_ij = M_ij min(1, w_j / w_i) para M duplamente estocástica: linhas somam <= 1 e
    sum_i w_i S_ij = sum_i M_ij min(w_i, w_j) <= w_j. Com pesos iguais, S = M.
    """
    return M * np.minimum(1.0, pesos[None, :] / pesos[:, None])


def _matriz_subestocastica(params: dict, pesos: np.ndarray, seed: int) -> np.ndarray:
    if "matrix" in params:
        return np.asarray(params["matrix"], dtype=float)
    return _ajustar_aos_pesos(_matriz_preset(params, pesos.size, seed), pesos)


def _matriz_preset(params: dict, d: int, seed: int) -> np.ndarray:
    preset = params.get("preset", "shift")
    deslocamento = np.roll(np.eye(d), 1, axis=0)
    if preset == "shift":
        return deslocamento
    if preset == "averaging":
        return np.full((d, d), 1.0 / d)
    if preset == "lazy_shift":
        lam = float(params.get("lambda", 0.5))
        return lam * deslocamento + (1 - lam) * np.eye(d)
    if preset == "random":
        rng = gerador(seed, "subestocastica")
        pesos_mistura = rng.dirichlet(np.ones(int(params.get("n_permutations", 3))))
        return sum(p * np.eye(d)[rng.permutation(d)] for p in pesos_mistura)
    raise ErroDominio(f"preset subestocástico desconhecido: {preset} (use {PRESETS_SUBESTOCASTICOS})")


def _matriz_correlacao(params: dict, d: int) -> np.ndarray:
    c = params.get("correlation", 0.5)
    if isinstance(c, (int, float)):
        return (1 - c) * np.eye(d) + c * np.ones((d, d))
    return np.asarray(c, dtype=complex)


def montar_operador(A: TracedAlgebra, secao: dict, seed: int) -> DSOperator:
    """
    Monta o operador descrito na seção [operator] (recursivo em compose/mix).

    Os construtores rodam com strict=False: o certificado é cobrado depois por
    verify_ds, que nomeia a checagem que falhou.
    """
    kind = secao.get("kind", "identity")
    params = secao.get("params", {}) or {}
    seed_op = derivar_seed(seed, "operador", kind, secao.get("seed") or 0)

    if kind == "identity":
        return DSOperator.identity(A)
    if kind == "unitary":
        if "phases" in params:
            fases = np.asarray(params["phases"], dtype=float)
            u = A.from_diagonal(np.exp(1j * np.pi * fases))
        else:
            u = random_unitary(A, seed_op)
        return from_unitary_conjugation(u, strict=False)
    if kind == "schur":
        bloco = int(params.get("block", 0))
        if not 0 <= bloco < len(A.blocks):
            raise ErroDominio(f"operator.params.block = {bloco} fora da álgebra")
        return from_schur_correlation(A, _matriz_correlacao(params, A.blocks[bloco]), bloco, strict=False)
    if kind == "substochastic":
        if not A.is_commutative:
            raise ErroDominio("operador subestocástico exige álgebra com blocos de dimensão 1")
        S = _matriz_subestocastica(params, np.asarray(A.weights), seed_op)
        return from_substochastic(S, A.weights, strict=False)
    if kind in ("compose", "mix"):
        operadores = params.get("operators", [])
        if len(operadores) != 2:
            raise ErroDominio(f"{kind} exige exatamente dois operadores em params.operators")
        T1 = montar_operador(A, operadores[0], derivar_seed(seed, kind, 1))
        T2 = montar_operador(A, operadores[1], derivar_seed(seed, kind, 2))
        if kind == "compose":
            return compose(T1, T2, strict=False)
        return convex_combine(T1, T2, float(params.get("lambda", 0.5)), strict=False)
    raise ErroDominio(f"operator.kind desconhecido: {kind} (use {TIPOS_OPERADOR})")


def montar_elemento(A: TracedAlgebra, secao: SecaoElemento, phi: OrliczFunction, seed: int) -> AlgElement:
    if secao.kind == "diagonal":
        if secao.diagonal is None:
            raise ErroDominio("element.kind = diagonal exige element.diagonal")
        x = A.from_diagonal(secao.diagonal)
    elif secao.kind == "blocks":
        if secao.blocks is None:
            raise ErroDominio("element.kind = blocks exige element.blocks")
        x = A.from_blocks(secao.blocks)
    else:
        x = random_element(A, secao.kind, derivar_seed(seed, "elemento", secao.seed or 0))

    if secao.rescale_to_norm is not None:
        norma = luxemburg_norm(A, x, phi).value
        if norma > 0:
            x = x * (secao.rescale_to_norm / norma)
    return x


def montar_cenario(cfg: ScenarioConfig) -> Cenario:
    A = TracedAlgebra.from_pairs(cfg.algebra)
    phi = orlicz_from_config(cfg.orlicz.kind, cfg.orlicz.p, cfg.orlicz.alpha, cfg.orlicz.knots)
    T = montar_operador(A, cfg.operator.model_dump(), cfg.seed)
    x = montar_elemento(A, cfg.element, phi, cfg.seed)
    logger.debug(f"Cenário {cfg.id}: blocos={A.blocks}, Phi={phi.descricao}, T={T.descriptor.get('kind')}")
    return Cenario(config=cfg, algebra=A, phi=phi, operador=T, x=x)

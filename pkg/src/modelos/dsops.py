"""
Operadores de Dunford-Schwartz na álgebra traçada finita.

Cada operador é guardado como uma matriz densa D x D (D = sum_j d_j^2) agindo
sobre vec(x), a concatenação linha a linha dos blocos. Aqui ficam os
construtores, o certificado DS, as médias ergódicas, o limite por projeção
espectral no autovalor 1 e a desigualdade de Kadison.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.linalg import block_diag

from config import GAP_ESPECTRAL_MIN, TOL_PONTO_FIXO, TOL_PSD
from modelos.algebra import (AlgElement, TracedAlgebra, checar_pertence, lp_norm,
                             random_element, uniform_norm)
from modelos.erros import ErroConsistencia, ErroDominio, ErroEstrutural
from modelos.orlicz import OrliczFunction, luxemburg_norm
from utils import gerador

logger = logging.getLogger("DSOps")

TOL_AMOSTRAS = 1e-9
N_AMOSTRAS = 50
NOCAO_CP = "completamente positivo (Choi PSD)"


def _permutacao_transposta(A: TracedAlgebra) -> np.ndarray:
    """Índices que levam vec(x) em vec(x^T), bloco a bloco."""
    indices, inicio = [], 0
    for d in A.blocks:
        a, b = np.divmod(np.arange(d * d), d)
        indices.append(inicio + b * d + a)
        inicio += d * d
    return np.concatenate(indices)


@dataclass(frozen=True, eq=False)
class DSOperator:
    """
    Mapa linear T na álgebra, representado por uma matriz densa sobre vec(x).

    descriptor guarda o tipo de construtor e seus parâmetros.
    """

    parent: TracedAlgebra
    matrix: np.ndarray
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        D = self.parent.vec_dimension
        if m.shape != (D, D):
            raise ErroEstrutural(f"superoperador {m.shape} incompatível com dimensão vetorizada {D}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_map(cls, A: TracedAlgebra, f: Callable[[AlgElement], AlgElement], descriptor: dict) -> "DSOperator":
        """Monta a matriz aplicando f a cada elemento da base canônica."""
        D = A.vec_dimension
        colunas = []
        for i in range(D):
            base = np.zeros(D, dtype=complex)
            base[i] = 1.0
            colunas.append(f(A.from_vec(base)).vec())
        return cls(A, np.column_stack(colunas), descriptor)

    @classmethod
    def identity(cls, A: TracedAlgebra) -> "DSOperator":
        return cls(A, np.eye(A.vec_dimension), {"kind": "identity"})

    def apply(self, x: AlgElement) -> AlgElement:
        checar_pertence(self.parent, x)
        return self.parent.from_vec(self.matrix @ x.vec())

    __call__ = apply

    @cached_property
    def adjoint_matrix(self) -> np.ndarray:
        """
        Matriz de T^dagger com tau(T(x) y) = tau(x T^dagger(y)).

        Com tau(a b) = vec(a)^T W Pi vec(b), resulta T^dagger = Pi W^{-1} M^T W Pi.
        """
        pi = _permutacao_transposta(self.parent)
        w = self.parent.block_weights_vec()
        mt = self.matrix.T
        return (mt[np.ix_(pi, pi)] * w[pi][None, :]) / w[pi][:, None]

    def trace_adjoint(self) -> "DSOperator":
        return DSOperator(self.parent, self.adjoint_matrix, {"kind": "trace_adjoint", "of": self.descriptor})

    def apply_adjoint(self, y: AlgElement) -> AlgElement:
        checar_pertence(self.parent, y)
        return self.parent.from_vec(self.adjoint_matrix @ y.vec())

    def power(self, k: int) -> "DSOperator":
        if k < 0:
            raise ErroDominio("potência negativa de um operador")
        return DSOperator(self.parent, np.linalg.matrix_power(self.matrix, k),
                          {"kind": "power", "k": int(k), "of": self.descriptor})

    def as_average(self, n: int) -> "DSOperator":
        """O próprio mapa A_n = (1/n) sum_{k<n} T^k."""
        if n < 1:
            raise ErroDominio("média ergódica exige n >= 1")
        D = self.parent.vec_dimension
        soma = np.zeros((D, D), dtype=complex)
        potencia = np.eye(D, dtype=complex)
        for _ in range(n):
            soma += potencia
            potencia = self.matrix @ potencia
        return DSOperator(self.parent, soma / n, {"kind": "average", "n": int(n), "of": self.descriptor})


@dataclass
class DSCertificate:
    """Resultado de verify_ds: três checagens estruturais e a amostragem direta."""

    complete_positivity: bool
    min_choi_eigenvalue: float
    unital_margin: float
    trace_margin: float
    unital_equality: bool
    trace_equality: bool
    sup_ratio_max: float
    l1_ratio_max: float
    n_samples: int

    @property
    def contractive_sup(self) -> bool:
        return self.unital_margin >= -TOL_PSD

    @property
    def contractive_l1(self) -> bool:
        return self.trace_margin >= -TOL_PSD

    @property
    def samples_ok(self) -> bool:
        return self.sup_ratio_max <= 1 + TOL_AMOSTRAS and self.l1_ratio_max <= 1 + TOL_AMOSTRAS

    @property
    def positivity_notion(self) -> str:
        return NOCAO_CP if self.complete_positivity else "não certificado"

    @property
    def passed(self) -> bool:
        return self.complete_positivity and self.contractive_sup and self.contractive_l1 and self.samples_ok

    def falhas(self) -> List[str]:
        nomes = []
        if not self.complete_positivity:
            nomes.append("complete_positivity")
        if not self.contractive_sup:
            nomes.append("T(1) <= 1")
        if not self.contractive_l1:
            nomes.append("T_dagger(1) <= 1")
        if not self.samples_ok:
            nomes.append("amostras")
        return nomes

    def como_dict(self) -> dict:
        return {
            "complete_positivity": self.complete_positivity,
            "min_choi_eigenvalue": self.min_choi_eigenvalue,
            "unital_margin": self.unital_margin,
            "trace_margin": self.trace_margin,
            "unital_equality": self.unital_equality,
            "trace_equality": self.trace_equality,
            "sup_ratio_max": self.sup_ratio_max,
            "l1_ratio_max": self.l1_ratio_max,
            "n_samples": self.n_samples,
            "positivity_notion": self.positivity_notion,
            "passed": self.passed,
            "failed_checks": self.falhas(),
        }


def _reverificar(T: DSOperator, strict: bool, contexto: str) -> DSOperator:
    if strict:
        cert = verify_ds(T)
        if not cert.passed:
            raise ErroConsistencia(f"{contexto}: certificado DS falhou em {cert.falhas()}")
    return T


def from_unitary_conjugation(u: AlgElement, strict: bool = True) -> DSOperator:
    """T(x) = u x u*; vec(u x u*) = (u kron conj(u)) vec(x) com vec linha a linha."""
    A = u.parent
    if strict and not (u.adjoint() @ u).allclose(A.identity(), atol=1e-9):
        raise ErroDominio("from_unitary_conjugation exige u*u = 1")
    matriz = block_diag(*[np.kron(b, b.conj()) for b in u.data])
    return DSOperator(A, matriz, {"kind": "unitary"})


def from_schur_correlation(A: TracedAlgebra, C: np.ndarray, block: int = 0, strict: bool = True) -> DSOperator:
    """
    Produto de Schur (entrada a entrada) por uma matriz de correlação C no
    bloco escolhido; identidade nos demais.
    """
    if not 0 <= block < len(A.blocks):
        raise ErroEstrutural(f"bloco {block} inexistente (álgebra com {len(A.blocks)} blocos)")
    C = np.asarray(C, dtype=complex)
    d = A.blocks[block]
    if C.shape != (d, d):
        raise ErroEstrutural(f"matriz de correlação {C.shape} para bloco de dimensão {d}")
    if strict:
        if np.max(np.abs(np.diag(C) - 1)) > 1e-9:
            raise ErroDominio("matriz de correlação precisa ter diagonal 1")
        if np.max(np.abs(C - C.conj().T)) > 1e-9 or np.linalg.eigvalsh((C + C.conj().T) / 2).min() < -TOL_PSD:
            raise ErroDominio("matriz de correlação precisa ser PSD")
    diagonal = []
    for j, dj in enumerate(A.blocks):
        diagonal.append(C.ravel() if j == block else np.ones(dj * dj))
    return DSOperator(A, np.diag(np.concatenate(diagonal)), {"kind": "schur", "block": int(block)})


def from_substochastic(S: np.ndarray, weights: Optional[Sequence[float]] = None, strict: bool = True) -> DSOperator:
    """
    Operador comutativo na álgebra diagonal: (T x)_i = sum_j S_ij x_j.

    Raises:
        ErroDominio: entrada negativa, linha com soma > 1 ou coluna ponderada
            sum_i w_i S_ij > w_j (nomeando a linha/coluna)
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ErroEstrutural(f"matriz subestocástica precisa ser quadrada, recebido {S.shape}")
    d = S.shape[0]
    w = np.ones(d) if weights is None else np.asarray(weights, dtype=float)
    if w.size != d:
        raise ErroEstrutural(f"{w.size} pesos para matriz {d}x{d}")
    A = TracedAlgebra.diagonal(w)
    if strict:
        if np.any(S < 0):
            i, j = np.argwhere(S < 0)[0]
            raise ErroDominio(f"entrada negativa S[{i},{j}] = {S[i, j]}")
        linhas = S.sum(axis=1)
        for i in np.flatnonzero(linhas > 1 + 1e-12):
            raise ErroDominio(f"linha {i} soma {linhas[i]:.6g} > 1 (contratividade em L^inf)")
        colunas = w @ S
        for j in np.flatnonzero(colunas > w * (1 + 1e-12)):
            raise ErroDominio(f"coluna {j}: sum_i w_i S_ij = {colunas[j]:.6g} > w_{j} = {w[j]:.6g} (contratividade em L^1)")
    return DSOperator(A, S, {"kind": "substochastic"})


def compose(T1: DSOperator, T2: DSOperator, strict: bool = True) -> DSOperator:
    """T1 o T2, com o certificado refeito no resultado."""
    if T1.parent != T2.parent:
        raise ErroEstrutural("composição de operadores em álgebras diferentes")
    T = DSOperator(T1.parent, T1.matrix @ T2.matrix, {"kind": "compose", "operators": [T1.descriptor, T2.descriptor]})
    return _reverificar(T, strict, "compose")


def convex_combine(T1: DSOperator, T2: DSOperator, lam: float, strict: bool = True) -> DSOperator:
    """lam T1 + (1 - lam) T2."""
    if T1.parent != T2.parent:
        raise ErroEstrutural("combinação de operadores em álgebras diferentes")
    if not 0 <= lam <= 1:
        raise ErroDominio(f"lambda precisa estar em [0, 1] (recebido {lam})")
    T = DSOperator(T1.parent, lam * T1.matrix + (1 - lam) * T2.matrix,
                   {"kind": "mix", "lambda": float(lam), "operators": [T1.descriptor, T2.descriptor]})
    return _reverificar(T, strict, "convex_combine")


def _menor_autovalor_choi(T: DSOperator) -> float:
    """Menor autovalor entre as matrizes de Choi de cada par (bloco de entrada, bloco de saída)."""
    A = T.parent
    inicios = np.concatenate([[0], np.cumsum([d * d for d in A.blocks])])
    menor = np.inf
    for j, dj in enumerate(A.blocks):
        for k, dk in enumerate(A.blocks):
            choi = np.zeros((dj * dk, dj * dk), dtype=complex)
            for a in range(dj):
                for b in range(dj):
                    coluna = T.matrix[inicios[k]:inicios[k + 1], inicios[j] + a * dj + b]
                    choi[a * dk:(a + 1) * dk, b * dk:(b + 1) * dk] = coluna.reshape(dk, dk)
            herm = (choi + choi.conj().T) / 2
            escala = max(1.0, float(np.max(np.abs(herm))))
            menor = min(menor, float(np.linalg.eigvalsh(herm).min()) / escala)
    return menor


def verify_ds(T: DSOperator, n_samples: int = N_AMOSTRAS, seed: int = 0) -> DSCertificate:
    """
    Certificado Dunford-Schwartz.

    (i) positividade completa pela matriz de Choi (mais forte que positividade);
    (ii) T(1) <= 1; (iii) T_dagger(1) <= 1; e n_samples elementos aleatórios
    conferindo ||T x||_inf <= ||x||_inf e ||T x||_1 <= ||x||_1 diretamente.
    """
    A = T.parent
    um = A.identity()
    menor_choi = _menor_autovalor_choi(T)

    t_um = T.apply(um)
    t_adj_um = T.apply_adjoint(um)
    margem_unital = (um - t_um).hermitian_part().min_eigenvalue()
    margem_traco = (um - t_adj_um).hermitian_part().min_eigenvalue()

    rng = gerador(seed, "verify_ds")
    sup_max, l1_max = 0.0, 0.0
    for s in rng.integers(0, 2 ** 62, size=n_samples):
        x = random_element(A, "general", int(s))
        y = T.apply(x)
        sup_max = max(sup_max, uniform_norm(y) / uniform_norm(x))
        l1_max = max(l1_max, lp_norm(A, y, 1) / lp_norm(A, x, 1))

    cert = DSCertificate(
        complete_positivity=menor_choi >= -TOL_PSD,
        min_choi_eigenvalue=menor_choi,
        unital_margin=margem_unital,
        trace_margin=margem_traco,
        unital_equality=t_um.allclose(um, atol=1e-9),
        trace_equality=t_adj_um.allclose(um, atol=1e-9),
        sup_ratio_max=sup_max,
        l1_ratio_max=l1_max,
        n_samples=n_samples,
    )
    if cert.passed:
        logger.debug(f"✅ verify_ds {T.descriptor.get('kind')}: ok")
    else:
        logger.warning(f"⚠️ verify_ds {T.descriptor.get('kind')}: falhou em {cert.falhas()}")
    return cert


def orlicz_contractivity(T: DSOperator, phi: OrliczFunction, seed: int = 0, n_samples: int = N_AMOSTRAS) -> float:
    """Maior razão ||T x||_Phi / ||x||_Phi sobre elementos aleatórios."""
    A = T.parent
    rng = gerador(seed, "contratividade")
    razao = 0.0
    for s in rng.integers(0, 2 ** 62, size=n_samples):
        x = random_element(A, "general", int(s))
        razao = max(razao, luxemburg_norm(A, T.apply(x), phi).value / luxemburg_norm(A, x, phi).value)
    return razao


def iterate_averages(T: DSOperator, x: AlgElement, N: int) -> Iterator[Tuple[int, AlgElement, AlgElement]]:
    """
    Gera (n, A_n(x), T^{n-1}(x)) para n = 1..N pela recorrência
    A_n = ((n-1) A_{n-1} + T^{n-1} x) / n.
    """
    checar_pertence(T.parent, x)
    if N < 1:
        raise ErroDominio("horizonte N precisa ser >= 1")
    A = T.parent
    y = x.vec()
    media = np.zeros_like(y)
    for n in range(1, N + 1):
        media = ((n - 1) * media + y) / n
        yield n, A.from_vec(media), A.from_vec(y)
        y = T.matrix @ y


def fit_rate(ns: np.ndarray, dists: np.ndarray, n_min: Optional[int] = None) -> Optional[dict]:
    """
    Expoente de ||A_n - x_hat|| ~ C n^k por mínimos quadrados em log-log.

    Usa o envelope superior (máximo em faixas geométricas de n), já que a
    distância zera periodicamente para operadores de rotação.
    """
    ns = np.asarray(ns, dtype=float)
    dists = np.asarray(dists, dtype=float)
    if ns.size == 0:
        return None
    n_max = float(ns.max())
    if n_min is None:
        n_min = 100 if n_max >= 1000 else max(1, int(n_max // 10))
    escala = float(np.nanmax(dists)) if np.any(np.isfinite(dists)) else 0.0
    validos = (ns >= n_min) & np.isfinite(dists) & (dists > 1e-14 * max(escala, 1e-300))
    if np.count_nonzero(validos) < 2:
        return None
    ns, dists = ns[validos], dists[validos]

    n_faixas = max(2, int(np.ceil(2 * np.log2(ns.max() / ns.min()))))
    bordas = np.geomspace(ns.min(), ns.max() * (1 + 1e-12), n_faixas + 1)
    xs, ys = [], []
    for lo, hi in zip(bordas[:-1], bordas[1:]):
        dentro = (ns >= lo) & (ns < hi)
        if np.any(dentro):
            k = np.argmax(np.where(dentro, dists, -np.inf))
            xs.append(ns[k])
            ys.append(dists[k])
    if len(xs) < 2:
        return None
    expoente, intercepto = np.polyfit(np.log(xs), np.log(ys), 1)
    return {
        "exponent": float(expoente),
        "constant": float(np.exp(intercepto)),
        "n_range": [float(min(xs)), float(max(xs))],
        "n_points": len(xs),
        "finite_dimensional_artifact": True,
    }


@dataclass
class FixedPointLimit:
    """Projeção P_fix com A_n(x) -> P_fix(x); method 'espectral' ou 'cesaro'."""

    parent: TracedAlgebra
    matrix: np.ndarray
    gap: Optional[float]
    method: str
    flagged: bool
    motivo: str = ""

    def apply(self, x: AlgElement) -> AlgElement:
        checar_pertence(self.parent, x)
        return self.parent.from_vec(self.matrix @ x.vec())

    __call__ = apply

    def como_dict(self) -> dict:
        return {"gap": self.gap, "method": self.method, "flagged": self.flagged, "motivo": self.motivo}


def fixed_point_limit(T: DSOperator, n_cesaro: int = 10_000) -> FixedPointLimit:
    """
    Projeção no autoespaço do autovalor 1 paralela aos demais autoespaços.

    P = V (U^H V)^{-1} U^H com V e U os núcleos à direita e à esquerda de M - I,
    obtidos numa única SVD com tolerância TOL_PONTO_FIXO. Se os demais
    autovalores estão a menos de GAP_ESPECTRAL_MIN de 1, ou a inversão é mal
    condicionada, devolve a média de Cesàro A_{n_cesaro} marcada como estimativa.
    """
    A = T.parent
    M = T.matrix
    D = M.shape[0]
    u, s, vh = np.linalg.svd(M - np.eye(D))
    tol = TOL_PONTO_FIXO * max(1.0, float(s[0]) if s.size else 0.0)
    nulos = s <= tol

    autovalores = np.linalg.eigvals(M)
    distancias = np.abs(autovalores - 1)
    fora = distancias[distancias > tol]
    gap = float(fora.min()) if fora.size else None

    motivo = ""
    P = None
    if gap is not None and gap < GAP_ESPECTRAL_MIN:
        motivo = f"autovalor a {gap:.2e} de 1 (abaixo de {GAP_ESPECTRAL_MIN:g})"
    elif not np.any(nulos):
        P = np.zeros((D, D), dtype=complex)
    else:
        V = vh[nulos].conj().T
        U = u[:, nulos]
        G = U.conj().T @ V
        if np.linalg.cond(G) > 1e8:
            motivo = "autovalor 1 não semissimples (U^H V mal condicionada)"
        else:
            P = V @ np.linalg.solve(G, U.conj().T)

    if P is None:
        logger.warning(f"⚠️ Limite espectral indisponível: {motivo}; usando Cesàro com n={n_cesaro}")
        return FixedPointLimit(A, T.as_average(n_cesaro).matrix, gap, "cesaro", True, motivo)
    return FixedPointLimit(A, P, gap, "espectral", False, motivo)


@dataclass
class ErgodicTrace:
    """Sequência de médias ergódicas resumida por n."""

    frame: pd.DataFrame
    limit: Optional[AlgElement] = None
    rate_fit: Optional[dict] = None

    COLUNAS = ("n", "sup_norm", "orlicz_norm", "dist_to_limit")

    @property
    def records(self) -> List[dict]:
        return self.frame.to_dict(orient="records")


def ergodic_averages(T: DSOperator, x: AlgElement, N: int, phi: Optional[OrliczFunction] = None,
                     limit: Optional[AlgElement] = None,
                     record_at: Optional[Sequence[int]] = None) -> ErgodicTrace:
    """
    A_n(T, x) para n = 1..N, resumidas por ||A_n||_inf, ||A_n||_Phi e
    ||A_n - x_hat||_inf (quando o limite é informado).
    """
    A = T.parent
    registrar = None if record_at is None else set(int(n) for n in record_at)
    linhas = []
    for n, media, _ in iterate_averages(T, x, N):
        if registrar is not None and n not in registrar:
            continue
        linhas.append({
            "n": n,
            "sup_norm": uniform_norm(media),
            "orlicz_norm": luxemburg_norm(A, media, phi).value if phi is not None else np.nan,
            "dist_to_limit": uniform_norm(media - limit) if limit is not None else np.nan,
        })
    frame = pd.DataFrame(linhas, columns=list(ErgodicTrace.COLUNAS))
    ajuste = fit_rate(frame["n"].to_numpy(), frame["dist_to_limit"].to_numpy()) if limit is not None else None
    return ErgodicTrace(frame=frame, limit=limit, rate_fit=ajuste)


def kadison_margin(s_x: AlgElement, s_x2: AlgElement) -> float:
    """Menor autovalor de S(x^2) - S(x)^2."""
    return (s_x2 - s_x @ s_x).hermitian_part().min_eigenvalue()


def kadison_check(S: DSOperator, x: AlgElement) -> float:
    """
    Margem da desigualdade de Kadison S(x)^2 <= S(x^2).

    Raises:
        ErroDominio: x não autoadjunto, S não positivo ou S(1) não <= 1
    """
    A = S.parent
    checar_pertence(A, x)
    if not x.is_self_adjoint():
        raise ErroDominio("Kadison exige x = x*")
    if _menor_autovalor_choi(S) < -TOL_PSD:
        raise ErroDominio("Kadison exige S positivo")
    um = A.identity()
    if (um - S.apply(um)).hermitian_part().min_eigenvalue() < -TOL_PSD:
        raise ErroDominio("Kadison exige S(1) <= 1")
    return kadison_margin(S.apply(x), S.apply(x @ x))

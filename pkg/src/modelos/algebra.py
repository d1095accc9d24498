"""
Modelo finito de uma álgebra de von Neumann semifinita com traço fiel.

A álgebra é uma soma direta de blocos matriciais quadrados M_{d_j} com pesos
de traço w_j > 0, de modo que tau(x) = sum_j w_j Tr(x_j). Os pesos permitem que
tau(e^perp) assuma valores muito menores ou muito maiores que 1, o que basta
para as afirmações epsilon-delta da teoria de integração não comutativa.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from config import TOL_AUTOVALOR, TOL_PSD
from modelos.erros import ErroDominio, ErroEstrutural
from utils import gerador

logger = logging.getLogger("Algebra")

# Inclusão de autovalores na fronteira de um intervalo espectral
TOL_FRONTEIRA = 1e-12

TIPOS_ALEATORIOS = ("general", "hermitian", "positive", "projection")


class TracedAlgebra(BaseModel):
    """Soma direta de blocos d_j x d_j com pesos de traço w_j."""

    model_config = ConfigDict(frozen=True)

    blocks: Tuple[int, ...]
    weights: Tuple[float, ...]

    @field_validator("blocks")
    @classmethod
    def _blocos_validos(cls, v):
        if len(v) == 0:
            raise ValueError("a álgebra precisa de pelo menos um bloco")
        if any(int(d) < 1 for d in v):
            raise ValueError(f"dimensões de bloco devem ser >= 1: {v}")
        return tuple(int(d) for d in v)

    @field_validator("weights")
    @classmethod
    def _pesos_validos(cls, v):
        if any(not np.isfinite(w) or w <= 0 for w in v):
            raise ValueError(f"pesos de traço devem ser finitos e > 0 (traço fiel): {v}")
        return tuple(float(w) for w in v)

    @model_validator(mode="after")
    def _mesmo_tamanho(self):
        if len(self.blocks) != len(self.weights):
            raise ValueError("blocks e weights devem ter o mesmo comprimento")
        return self

    @classmethod
    def from_pairs(cls, pares: Iterable[Sequence[float]]) -> "TracedAlgebra":
        """Constrói a partir do descritor de configuração [(dim, peso), ...]."""
        pares = [tuple(p) for p in pares]
        return cls(blocks=tuple(int(d) for d, _ in pares), weights=tuple(float(w) for _, w in pares))

    @classmethod
    def diagonal(cls, weights: Sequence[float]) -> "TracedAlgebra":
        """Álgebra comutativa l^inf(d) com medida atômica de massas w_i."""
        return cls(blocks=(1,) * len(weights), weights=tuple(weights))

    @property
    def total_dimension(self) -> int:
        return int(sum(self.blocks))

    @property
    def vec_dimension(self) -> int:
        return int(sum(d * d for d in self.blocks))

    @property
    def is_commutative(self) -> bool:
        return all(d == 1 for d in self.blocks)

    @property
    def trace_of_identity(self) -> float:
        return float(sum(d * w for d, w in zip(self.blocks, self.weights)))

    def identity(self) -> "AlgElement":
        return AlgElement(self, tuple(np.eye(d, dtype=complex) for d in self.blocks))

    def zero(self) -> "AlgElement":
        return AlgElement(self, tuple(np.zeros((d, d), dtype=complex) for d in self.blocks))

    def from_blocks(self, blocos: Sequence) -> "AlgElement":
        return AlgElement(self, tuple(np.asarray(b, dtype=complex) for b in blocos))

    def from_diagonal(self, valores: Sequence) -> "AlgElement":
        valores = np.asarray(valores, dtype=complex).ravel()
        if valores.size != self.total_dimension:
            raise ErroEstrutural(f"diagonal com {valores.size} entradas para dimensão total {self.total_dimension}")
        blocos, inicio = [], 0
        for d in self.blocks:
            blocos.append(np.diag(valores[inicio:inicio + d]))
            inicio += d
        return AlgElement(self, tuple(blocos))

    def from_vec(self, v: np.ndarray) -> "AlgElement":
        v = np.asarray(v, dtype=complex).ravel()
        if v.size != self.vec_dimension:
            raise ErroEstrutural(f"vetor de tamanho {v.size}, esperado {self.vec_dimension}")
        blocos, inicio = [], 0
        for d in self.blocks:
            blocos.append(v[inicio:inicio + d * d].reshape(d, d))
            inicio += d * d
        return AlgElement(self, tuple(blocos))

    def block_weights_vec(self) -> np.ndarray:
        """Peso w_j repetido d_j^2 vezes, na ordem de vec()."""
        return np.concatenate([np.full(d * d, w) for d, w in zip(self.blocks, self.weights)])


@dataclass(frozen=True, eq=False)
class AlgElement:
    """Operador bloco-diagonal; uma matriz complexa por bloco da álgebra-mãe."""

    parent: TracedAlgebra
    data: Tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.data) != len(self.parent.blocks):
            raise ErroEstrutural(f"{len(self.data)} blocos para uma álgebra com {len(self.parent.blocks)}")
        blocos = []
        for j, (b, d) in enumerate(zip(self.data, self.parent.blocks)):
            arr = np.array(b, dtype=complex)
            if arr.shape != (d, d):
                raise ErroEstrutural(f"bloco {j} com formato {arr.shape}, esperado {(d, d)}")
            arr.setflags(write=False)
            blocos.append(arr)
        object.__setattr__(self, "data", tuple(blocos))

    def _mesma_algebra(self, outro: "AlgElement"):
        if not isinstance(outro, AlgElement):
            raise TypeError(f"operação com {type(outro)} não suportada")
        if outro.parent != self.parent:
            raise ErroEstrutural("elementos de álgebras diferentes")

    def __add__(self, outro):
        self._mesma_algebra(outro)
        return AlgElement(self.parent, tuple(a + b for a, b in zip(self.data, outro.data)))

    def __sub__(self, outro):
        self._mesma_algebra(outro)
        return AlgElement(self.parent, tuple(a - b for a, b in zip(self.data, outro.data)))

    def __neg__(self):
        return AlgElement(self.parent, tuple(-a for a in self.data))

    def __mul__(self, escalar):
        if isinstance(escalar, AlgElement):
            raise TypeError("use @ para o produto da álgebra")
        return AlgElement(self.parent, tuple(escalar * a for a in self.data))

    __rmul__ = __mul__

    def __truediv__(self, escalar):
        return AlgElement(self.parent, tuple(a / escalar for a in self.data))

    def __matmul__(self, outro):
        self._mesma_algebra(outro)
        return AlgElement(self.parent, tuple(a @ b for a, b in zip(self.data, outro.data)))

    def adjoint(self) -> "AlgElement":
        return AlgElement(self.parent, tuple(a.conj().T for a in self.data))

    @property
    def H(self) -> "AlgElement":
        return self.adjoint()

    def to_dense(self) -> np.ndarray:
        return block_diag(*self.data)

    def vec(self) -> np.ndarray:
        return np.concatenate([b.ravel() for b in self.data])

    def diagonal(self) -> np.ndarray:
        return np.concatenate([np.diag(b) for b in self.data])

    def diagonal_part(self) -> "AlgElement":
        return AlgElement(self.parent, tuple(np.diag(np.diag(b)) for b in self.data))

    def hermitian_part(self) -> "AlgElement":
        return AlgElement(self.parent, tuple((b + b.conj().T) / 2 for b in self.data))

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(b)) for b in self.data))

    def is_self_adjoint(self, tol: float = TOL_AUTOVALOR) -> bool:
        escala = max(1.0, self.max_abs())
        return all(np.max(np.abs(b - b.conj().T)) <= tol * escala for b in self.data)

    def eigenvalues(self) -> np.ndarray:
        """Autovalores (com multiplicidade, por bloco concatenados) da parte hermitiana."""
        return np.concatenate([np.linalg.eigvalsh((b + b.conj().T) / 2) for b in self.data])

    def min_eigenvalue(self) -> float:
        return float(np.min(self.eigenvalues()))

    def is_positive(self, tol: Optional[float] = None) -> bool:
        """
        x >= 0 a menos de tolerância.

        Args:
            tol: tolerância absoluta; None usa a guarda relativa TOL_PSD * ||x||_inf
        """
        if not self.is_self_adjoint():
            return False
        if tol is None:
            tol = TOL_PSD * uniform_norm(self)
        return self.min_eigenvalue() >= -tol

    def leq(self, outro: "AlgElement", tol: Optional[float] = None) -> bool:
        """Ordem x <= y: y - x positivo."""
        return (outro - self).is_positive(tol)

    def allclose(self, outro: "AlgElement", atol: float = 1e-9) -> bool:
        self._mesma_algebra(outro)
        return all(np.allclose(a, b, rtol=0.0, atol=atol) for a, b in zip(self.data, outro.data))


@dataclass(frozen=True, eq=False)
class Projection(AlgElement):
    """Projeção autoadjunta e idempotente; e_perp = 1 - e."""

    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        super().__post_init__()
        if self.check:
            for j, b in enumerate(self.data):
                if np.max(np.abs(b - b.conj().T), initial=0.0) > 1e-8 or np.max(np.abs(b @ b - b), initial=0.0) > 1e-8:
                    raise ErroDominio(f"bloco {j} não é uma projeção (e = e* = e^2 violado)")

    @classmethod
    def from_element(cls, x: AlgElement, check: bool = True) -> "Projection":
        return cls(x.parent, x.data, check)

    def complement(self) -> "Projection":
        return Projection(self.parent, tuple(np.eye(b.shape[0]) - b for b in self.data), self.check)

    def rank(self) -> int:
        return int(round(sum(np.trace(b).real for b in self.data)))


@dataclass(frozen=True)
class SpectralDecomposition:
    """x = sum_k lambda_k e_k com e_k ortogonais somando 1."""

    parent: TracedAlgebra
    eigenvalues: np.ndarray
    eigenprojections: Tuple[Projection, ...]

    @property
    def multiplicities(self) -> np.ndarray:
        """Multiplicidades medidas pelo traço, tau(e_k)."""
        return np.array([trace(self.parent, e).real for e in self.eigenprojections])

    def reconstruct(self) -> AlgElement:
        total = self.parent.zero()
        for lam, e in zip(self.eigenvalues, self.eigenprojections):
            total = total + float(lam) * e
        return total


def checar_pertence(A: TracedAlgebra, x: AlgElement):
    if x.parent != A:
        raise ErroEstrutural("elemento não pertence à álgebra informada")


def _eigh_bloco(b: np.ndarray):
    return np.linalg.eigh((b + b.conj().T) / 2)


def trace(A: TracedAlgebra, x: AlgElement) -> complex:
    """tau(x) = sum_j w_j Tr(x_j)."""
    checar_pertence(A, x)
    return complex(sum(w * np.trace(b) for w, b in zip(A.weights, x.data)))


def absolute(x: AlgElement) -> AlgElement:
    """|x| = (x*x)^{1/2}, calculado pela SVD de cada bloco."""
    blocos = []
    for b in x.data:
        _, s, vh = np.linalg.svd(b)
        m = vh.conj().T @ np.diag(s) @ vh
        blocos.append((m + m.conj().T) / 2)
    return AlgElement(x.parent, tuple(blocos))


def uniform_norm(x: AlgElement) -> float:
    """||x||_inf: maior valor singular."""
    return float(max(np.linalg.norm(b, 2) for b in x.data))


def spectral_decompose(x: AlgElement, tol: float = TOL_AUTOVALOR) -> SpectralDecomposition:
    """
    Decomposição espectral de x autoadjunto com agrupamento de autovalores.

    Autovalores cuja distância ao vizinho é <= tol * ||x||_inf caem no mesmo
    grupo (encadeado); o valor do grupo é a média.
    """
    if not x.is_self_adjoint():
        raise ErroDominio("decomposição espectral exige x = x*")
    A = x.parent
    escala = tol * uniform_norm(x)

    entradas = []
    for j, b in enumerate(x.data):
        lam, vec = _eigh_bloco(b)
        for k in range(lam.size):
            entradas.append((float(lam[k]), j, vec[:, k]))
    entradas.sort(key=lambda item: item[0])

    grupos: List[list] = []
    for item in entradas:
        if grupos and item[0] - grupos[-1][-1][0] <= escala:
            grupos[-1].append(item)
        else:
            grupos.append([item])

    autovalores, projecoes = [], []
    for grupo in grupos:
        blocos = [np.zeros((d, d), dtype=complex) for d in A.blocks]
        for _, j, v in grupo:
            blocos[j] = blocos[j] + np.outer(v, v.conj())
        autovalores.append(float(np.mean([g[0] for g in grupo])))
        projecoes.append(Projection(A, tuple(blocos)))

    return SpectralDecomposition(A, np.array(autovalores), tuple(projecoes))


def functional_calculus(phi: Callable, x: AlgElement) -> AlgElement:
    """phi(x) = sum lambda phi(lambda) e_lambda para x autoadjunto."""
    if not x.is_self_adjoint():
        raise ErroDominio("cálculo funcional exige x = x*")
    blocos = []
    for b in x.data:
        lam, vec = _eigh_bloco(b)
        valores = np.asarray(phi(lam), dtype=float)
        blocos.append((vec * valores) @ vec.conj().T)
    return AlgElement(x.parent, tuple(blocos))


def apply_function(phi: Callable, x: AlgElement) -> AlgElement:
    """
    Phi(x) = int Phi(lambda) de_lambda para x positivo.

    Autovalores negativos dentro da tolerância são tratados como zero.

    Raises:
        ErroDominio: se x não é positivo
    """
    if not x.is_positive():
        raise ErroDominio(f"apply_function exige x >= 0 (menor autovalor {x.min_eigenvalue():.3e})")
    return functional_calculus(lambda lam: phi(np.clip(lam, 0.0, None)), x)


def lp_norm(A: TracedAlgebra, x: AlgElement, p: float) -> float:
    """||x||_p = tau(|x|^p)^{1/p}; p = inf devolve a norma uniforme."""
    checar_pertence(A, x)
    if p == np.inf:
        return uniform_norm(x)
    if p < 1:
        raise ErroDominio(f"norma L^p exige p >= 1 (recebido {p})")
    modulo_p = apply_function(lambda u: np.power(u, p), absolute(x))
    return float(max(trace(A, modulo_p).real, 0.0) ** (1.0 / p))


def spectral_projection(x: AlgElement, interval: Tuple[float, float],
                        closed: Tuple[bool, bool] = (True, True)) -> Projection:
    """
    Projeção espectral de x autoadjunto para o intervalo dado.

    Args:
        x: elemento autoadjunto
        interval: (a, b), aceitando -inf/inf
        closed: se cada extremo é fechado

    Returns:
        Projection sobre os autovetores com autovalor no intervalo (0 se vazio)
    """
    if not x.is_self_adjoint():
        raise ErroDominio("projeção espectral exige x = x*")
    a, b = interval
    tol = TOL_FRONTEIRA * max(1.0, uniform_norm(x))
    blocos = []
    for bloco in x.data:
        lam, vec = _eigh_bloco(bloco)
        dentro = np.ones(lam.size, dtype=bool)
        if np.isfinite(a):
            dentro &= (lam >= a - tol) if closed[0] else (lam > a + tol)
        if np.isfinite(b):
            dentro &= (lam <= b + tol) if closed[1] else (lam < b - tol)
        v = vec[:, dentro]
        blocos.append(v @ v.conj().T)
    return Projection(x.parent, tuple(blocos))


def projection_meet(ps: Sequence[Projection], tol: float = TOL_AUTOVALOR) -> Projection:
    """
    Ínfimo de projeções: projeção sobre o núcleo de sum_k p_k^perp.

    O núcleo é obtido pela decomposição espectral com limiar tol nos autovalores.
    """
    ps = list(ps)
    if not ps:
        raise ErroDominio("projection_meet exige ao menos uma projeção")
    A = ps[0].parent
    for p in ps[1:]:
        if p.parent != A:
            raise ErroEstrutural("projeções de álgebras diferentes")
    blocos = []
    for j, d in enumerate(A.blocks):
        soma = sum(np.eye(d) - p.data[j] for p in ps)
        lam, vec = _eigh_bloco(np.asarray(soma, dtype=complex))
        v = vec[:, lam <= tol]
        blocos.append(v @ v.conj().T)
    return Projection(A, tuple(blocos))


def _ginibre(rng: np.random.Generator, d: int) -> np.ndarray:
    return (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)


def _unitaria_haar(rng: np.random.Generator, d: int) -> np.ndarray:
    q, r = np.linalg.qr(_ginibre(rng, d))
    fases = np.diag(r) / np.abs(np.diag(r))
    return q * fases


def random_unitary(A: TracedAlgebra, seed: int) -> AlgElement:
    """Unitária de Haar em cada bloco (QR com correção de fase)."""
    rng = gerador(seed, "unitaria")
    return AlgElement(A, tuple(_unitaria_haar(rng, d) for d in A.blocks))


def random_element(A: TracedAlgebra, kind: str, seed: int) -> AlgElement:
    """
    Elemento aleatório determinístico dada a seed.

    Args:
        kind: general | hermitian | positive | projection
    """
    if kind not in TIPOS_ALEATORIOS:
        raise ErroDominio(f"tipo de elemento desconhecido: {kind}")
    rng = gerador(seed, "elemento", kind)
    blocos = []
    for d in A.blocks:
        g = _ginibre(rng, d)
        if kind == "general":
            blocos.append(g)
        elif kind == "hermitian":
            blocos.append((g + g.conj().T) / 2)
        elif kind == "positive":
            m = g @ g.conj().T / d
            blocos.append((m + m.conj().T) / 2)
        else:
            r = int(rng.integers(0, d + 1))
            q = _unitaria_haar(rng, d)[:, :r]
            m = q @ q.conj().T
            blocos.append((m + m.conj().T) / 2)
    x = AlgElement(A, tuple(blocos))
    if kind == "projection":
        return Projection.from_element(x)
    return x

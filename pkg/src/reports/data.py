from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


class Check(BaseModel):
    """Uma checagem do relatório; asserted=False marca quantidades só reportadas."""

    nome: str
    passou: bool
    valor: Any = None
    asserted: bool = True
    detalhe: str = ""


class RunReport(BaseModel):
    """
    Relatório de uma rodada (cenário x subcomando).

    wall_time fica fora do JSON para que relatórios com mesma configuração e
    seed sejam idênticos byte a byte.
    """

    scenario_id: str
    comando: str
    seed: int
    checks: List[Check] = Field(default_factory=list)
    artefatos: List[str] = Field(default_factory=list)
    resumo: Dict[str, Any] = Field(default_factory=dict)
    erro: Optional[str] = None
    wall_time: float = Field(default=0.0, exclude=True)

    @property
    def passou(self) -> bool:
        return self.erro is None and all(c.passou for c in self.checks if c.asserted)

    @property
    def falhas(self) -> List[str]:
        return [c.nome for c in self.checks if c.asserted and not c.passou]

    def registrar(self, nome: str, passou: bool, valor: Any = None, asserted: bool = True, detalhe: str = "") -> bool:
        self.checks.append(Check(nome=nome, passou=bool(passou), valor=valor, asserted=asserted, detalhe=detalhe))
        return bool(passou)

    def como_dict(self) -> dict:
        dado = self.model_dump()
        dado["passou"] = self.passou
        return dado

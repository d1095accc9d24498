"""
Hierarquia de exceções dos modelos.

Todas herdam de OrliczErro para que a CLI possa tratar falhas de modelo
separadamente de falhas inesperadas.
"""


class OrliczErro(Exception):
    """Base de todos os erros levantados pelos modelos."""


class ErroEstrutural(OrliczErro, ValueError):
    """Formato de blocos incompatível com a álgebra."""


class ErroDominio(OrliczErro, ValueError):
    """Pré-condição de uma operação violada."""


class ErroNumerico(OrliczErro, ArithmeticError):
    """Procedimento numérico não convergiu (ex.: intervalo da bissecção)."""


class ErroConsistencia(OrliczErro, RuntimeError):
    """Certificado interno falhou num objeto que deveria satisfazê-lo."""

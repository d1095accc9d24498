"""
Modelos matemáticos do Orlicz Ergódico.
Álgebras traçadas finitas, funções de valores singulares, funções de Orlicz,
operadores de Dunford-Schwartz e as testemunhas de equicontinuidade.
"""

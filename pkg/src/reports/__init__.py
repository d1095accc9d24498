"""Relatórios das rodadas: modelos RunReport/Check e gravação de artefatos."""

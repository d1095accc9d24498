"""Camada de experimentos: cenários TOML, suíte de invariantes e rodadas do CLI."""

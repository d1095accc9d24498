import json
import os

import pandas as pd
import pytest
from click.testing import CliRunner

from cli import cli


def _rodar(*args):
    return CliRunner().invoke(cli, list(args) + ["--jobs", "1"])


def _ler_json(caminho):
    with open(caminho, encoding="utf-8") as f:
        return json.load(f)


def test_maximal_no_shift(tmp_path, dir_cenarios):
    resultado = _rodar("maximal", "--config", os.path.join(dir_cenarios, "shift_d4.toml"), "--out", str(tmp_path))
    assert resultado.exit_code == 0, resultado.output

    saida = _ler_json(tmp_path / "shift_d4" / "maximal.json")
    assert saida["yeadon"]["trace_complement"] == pytest.approx(3.0)
    assert saida["yeadon"]["sup_bound"] <= 0.3

    relatorio = _ler_json(tmp_path / "shift_d4" / "maximal_report.json")
    assert relatorio["passou"] is True
    assert "wall_time" not in relatorio
    assert os.path.join("shift_d4", "maximal.json") in relatorio["artefatos"]


def test_boyd_gera_csv(tmp_path, dir_cenarios):
    resultado = _rodar("boyd", "--config", os.path.join(dir_cenarios, "boyd.toml"), "--out", str(tmp_path))
    assert resultado.exit_code == 0, resultado.output

    tabela = pd.read_csv(tmp_path / "boyd_quadrado" / "boyd.csv")
    assert list(tabela.columns) == ["s", "dilation_norm_lower", "local_index"]

    resumo = pd.read_csv(tmp_path / "boyd_resumo.csv")
    assert len(resumo) == 4
    assert resumo["passou"].all()


def test_filtro_de_cenarios(tmp_path, dir_cenarios):
    resultado = _rodar("boyd", "--config", os.path.join(dir_cenarios, "boyd.toml"), "--out", str(tmp_path),
                       "--scenarios", "boyd_l*")
    assert resultado.exit_code == 0, resultado.output
    assert sorted(p.name for p in tmp_path.iterdir() if p.is_dir()) == ["boyd_linear", "boyd_log"]


def test_filtro_vazio_e_erro(tmp_path, dir_cenarios):
    resultado = _rodar("boyd", "--config", os.path.join(dir_cenarios, "boyd.toml"), "--out", str(tmp_path),
                       "--scenarios", "nenhum*")
    assert resultado.exit_code == 2


def test_verify_com_falha_nomeada(tmp_path, dir_cenarios):
    caminho = os.path.join(dir_cenarios, "falhas", "schur_nao_psd.toml")
    resultado = _rodar("verify", "--config", caminho, "--out", str(tmp_path))
    assert resultado.exit_code == 1

    relatorio = _ler_json(tmp_path / "schur_nao_psd" / "verify_report.json")
    assert relatorio["passou"] is False
    [check] = [c for c in relatorio["checks"] if c["nome"] == "dsops.verify_ds"]
    assert check["passou"] is False
    assert "complete_positivity" in check["detalhe"]


def test_configuracao_invalida_sai_com_2(tmp_path):
    ruim = tmp_path / "ruim.toml"
    ruim.write_text('id = "x"\nalgebra = [[1.0, 1.0]]\nchave_estranha = 1\n', encoding="utf-8")
    resultado = _rodar("verify", "--config", str(ruim), "--out", str(tmp_path / "saida"))
    assert resultado.exit_code == 2


def test_erro_de_dominio_sai_com_2(tmp_path):
    ruim = tmp_path / "nao_comutativo.toml"
    ruim.write_text('id = "nc"\nalgebra = [[2.0, 1.0]]\n\n[operator]\nkind = "substochastic"\n', encoding="utf-8")
    resultado = _rodar("ergodic", "--config", str(ruim), "--out", str(tmp_path))
    assert resultado.exit_code == 2

    relatorio = _ler_json(tmp_path / "nc" / "ergodic_report.json")
    assert relatorio["erro"].startswith("ErroDominio")


def test_norms_reprodutivel(tmp_path, dir_cenarios):
    config = os.path.join(dir_cenarios, "schur_nc.toml")
    for nome in ("a", "b"):
        resultado = _rodar("norms", "--config", config, "--out", str(tmp_path / nome), "--seed", "7")
        assert resultado.exit_code == 0, resultado.output

    [cenario] = [p.name for p in (tmp_path / "a").iterdir() if p.is_dir()]
    for arquivo in ("norms.csv", "truncation.csv", "norms_report.json"):
        a = (tmp_path / "a" / cenario / arquivo).read_bytes()
        b = (tmp_path / "b" / cenario / arquivo).read_bytes()
        assert a == b, arquivo


def test_seed_sobrescreve_o_cenario(tmp_path, dir_cenarios):
    config = os.path.join(dir_cenarios, "padrao.toml")
    resultado = _rodar("norms", "--config", config, "--out", str(tmp_path), "--seed", "11")
    assert resultado.exit_code == 0, resultado.output
    assert _ler_json(tmp_path / "padrao" / "norms_report.json")["seed"] == 11


def test_ergodic_media(tmp_path, dir_cenarios):
    resultado = _rodar("ergodic", "--config", os.path.join(dir_cenarios, "comutativos.toml"), "--out", str(tmp_path),
                       "--scenarios", "media_d3")
    assert resultado.exit_code == 0, resultado.output

    serie = pd.read_csv(tmp_path / "media_d3" / "ergodic.csv")
    assert list(serie.columns) == ["n", "sup_norm", "orlicz_norm", "dist_to_limit", "sandwiched_dist",
                                   "one_sided_dist"]
    assert len(serie) == 128
    assert serie["dist_to_limit"].iloc[-1] == pytest.approx(2.0 / 128)

    relatorio = _ler_json(tmp_path / "media_d3" / "ergodic_report.json")
    assert relatorio["resumo"]["limit_method"] == "espectral"
    checks = {c["nome"]: c["passou"] for c in relatorio["checks"]}
    assert checks["ergodic.decay_certificate"] is True
    assert checks["ergodic.sandwiched_tail"] is True


def test_ergodic_lazy_shift_ponderado(tmp_path, dir_cenarios):
    resultado = _rodar("ergodic", "--config", os.path.join(dir_cenarios, "comutativos.toml"), "--out", str(tmp_path),
                       "--scenarios", "lazy_shift_d5")
    assert resultado.exit_code == 0, resultado.output

    relatorio = _ler_json(tmp_path / "lazy_shift_d5" / "ergodic_report.json")
    assert relatorio["passou"] is True

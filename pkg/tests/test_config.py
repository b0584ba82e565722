import pytest

from partial_search.config import Config, load_config, parse_config_text
from partial_search.errors import InvalidParameterError


def test_defaults():
    cfg = Config()
    assert (cfg.n_cap, cfg.margin, cfg.tolerance, cfg.format, cfg.workers, cfg.seed) == (24, 1e-6, 1e-7, "text", 1, 0)


def test_parse_text():
    text = "# comment\nmargin = 1e-9  # trailing\n\nformat=json\n"
    assert parse_config_text(text) == {"margin": "1e-9", "format": "json"}
    with pytest.raises(InvalidParameterError, match="line 1"):
        parse_config_text("margin 3")


def test_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("margin=1e-9\nseed=7\nn-cap=12\n")
    cfg = load_config(path, {"seed": 11, "margin": None})
    assert cfg.margin == 1e-9 and cfg.seed == 11 and cfg.n_cap == 12


@pytest.mark.parametrize(
    "values",
    [{"colour": "red"}, {"margin": "abc"}, {"margin": "0"}, {"format": "xml"}, {"workers": "0"}, {"n_cap": "0"}],
)
def test_rejects(values):
    with pytest.raises(InvalidParameterError):
        Config().updated(values)

import pytest

from csframes import families as fa
from csframes import nonlinearity as nl
from csframes.config import parse_complex, parse_config
from csframes.errors import ConfigError

BASIC = """\
# photon-added run
[family]
kind = photon_added
lambda = 0.5      # shift
g = 1, 0.25

[truncation]
n_max = 40

[task]
kind = eval
z = 0.1+0.2j, -0.3i, i
"""


def test_basic_parse():
    cfg = parse_config(BASIC)
    assert cfg.family == fa.PhotonAdded(0.5, fa.EntireSeries((1.0, 0.25)))
    assert cfg.trunc.n_max == 40
    assert cfg.task == "eval"
    assert cfg.params["z"] == [0.1 + 0.2j, -0.3j, 1j]
    assert cfg.epsilon == 1e-3 and cfg.output is None


@pytest.mark.parametrize(
    "text,want",
    [("0.5", 0.5), ("1i", 1j), ("-i", -1j), ("j", 1j), ("0.5 - 2i", 0.5 - 2j), ("3e-1+1e-2j", 0.3 + 0.01j)],
)
def test_parse_complex(text, want):
    assert parse_complex(text) == want


@pytest.mark.parametrize(
    "block,want",
    [
        ("kind = canonical", fa.Canonical()),
        ("kind = binomial\nmu = -0.3", fa.Binomial(-0.3)),
        ("kind = gp\nkappa = 1.5", fa.GilmorePerelomov(1.5)),
        ("kind = bg", fa.BarutGirardello(1.0)),
        ("kind = squeezed\nu = 2\nv = 0.3", fa.Squeezed(2.0, 0.3)),
        ("kind = hypergeometric\nalpha = 1.5\nbeta = 2, 3\ninverse = true", fa.Hypergeometric((1.5,), (2.0, 3.0), True)),
        ("kind = rescaled\nnonlinearity = q_osc\nq = 0.9", fa.Rescaled(nl.q_osc(0.9))),
        ("kind = rescaled\nnonlinearity = gp\nkappa = 2\ninvert = true", fa.Rescaled(nl.gp(2.0).reciprocal())),
        ("kind = rescaled\nnonlinearity = trapped_ion\neta = 0.1\nvariant = verbatim", fa.Rescaled(nl.trapped_ion(0.1, "verbatim"))),
        ("kind = rescaled\nnonlinearity = table\nvalues = 1, 2, 3", fa.Rescaled(nl.table([1, 2, 3]))),
    ],
)
def test_family_kinds(block, want):
    cfg = parse_config(f"[family]\n{block}\n[task]\nkind = verify\n")
    assert cfg.family == want


@pytest.mark.parametrize(
    "text,line,key",
    [
        ("[family]\nkind = canonical\nmu = 1\n[task]\nkind = verify\n", 3, "mu"),
        ("[family]\nkind = nope\n[task]\nkind = verify\n", 2, "kind"),
        ("[famly]\nkind = canonical\n", 1, None),
        ("[family]\nkind = canonical\n[task]\nkind = fly\n", 4, "kind"),
        ("[family]\nkind = binomial\n[task]\nkind = verify\n", 1, "mu"),
        ("[family]\nkind = binomial\nmu = abc\n[task]\nkind = verify\n", 3, "mu"),
        ("[family]\nkind = hypergeometric\nalpha = 1,1,1\nbeta = 1\n[task]\nkind = verify\n", 2, "kind"),
        ("[family]\nkind = gp\nkappa = 0.7\n[task]\nkind = verify\n", 2, "kind"),
        ("[family]\nkind = canonical\n[truncation]\nn_max = 1\n[task]\nkind = verify\n", 3, None),
        ("[family]\nkind = canonical\n[task]\nkind = eval\n", 4, "z"),
        ("[family]\nkind = canonical\n[task]\nkind = moments\nmax_n = -1\n", 5, "max_n"),
        ("[family]\nkind = canonical\nkind = gp\n[task]\nkind = verify\n", 3, "kind"),
        ("kind = canonical\n", 1, None),
        ("[family]\nkind canonical\n", 2, None),
        ("[family]\nkind = canonical\n[task]\nkind = verify\nepsilon = 2\n", 5, "epsilon"),
    ],
)
def test_errors_carry_location(text, line, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert info.value.key == key
    assert (f"line {line}" in str(info.value)) == (line is not None)


def test_missing_sections():
    with pytest.raises(ConfigError, match=r"\[task\]"):
        parse_config("[family]\nkind = canonical\n")
    with pytest.raises(ConfigError, match=r"\[family\]"):
        parse_config("[task]\nkind = verify\n")


def test_task_from_command_line():
    cfg = parse_config("[family]\nkind = canonical\n", task="verify")
    assert cfg.task == "verify"
    cfg = parse_config("[family]\nkind = canonical\n[task]\nepsilon = 0.01\n", task="scan")
    assert cfg.task == "scan" and cfg.epsilon == 0.01
    with pytest.raises(ConfigError, match="requested"):
        parse_config("[family]\nkind = canonical\n[task]\nkind = verify\n", task="scan")


def test_task_specific_keys():
    with pytest.raises(ConfigError) as info:
        parse_config("[family]\nkind = canonical\n[task]\nkind = verify\nmax_n = 3\n")
    assert info.value.key == "max_n"
    cfg = parse_config("[family]\nkind = gp\n[task]\nkind = moments\nmax_n = 8\nn_nodes = 40\ntol = 1e-9\noutput = here\n")
    assert cfg.params == {"max_n": 8, "n_nodes": 40, "tol": 1e-9}
    assert cfg.output == "here"

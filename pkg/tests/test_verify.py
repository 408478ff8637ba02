import numpy as np
import pytest

from csframes import families as fa
from csframes import nonlinearity as nl
from csframes.fock import TruncationPolicy
from csframes.verify import Check, run_checks, sample_points


def test_check_pass_logic():
    assert Check("x", 1e-9, 1e-8).passed
    assert not Check("x", float("nan"), 1e-8).passed


def test_sample_points_inside_both_discs():
    pts = sample_points(fa.GilmorePerelomov(1.0), 20, np.random.default_rng(0), both=True)
    assert len(pts) == 20 and max(abs(z) for z in pts) < 1


@pytest.mark.parametrize(
    "fam",
    [
        fa.Canonical(),
        fa.Rescaled(nl.q_osc(0.5)),
        fa.BarutGirardello(1.0),
        fa.Hypergeometric((1.5,), (2.0,)),
        fa.PhotonAdded(-0.6),
        fa.PhotonAdded(0.3, fa.EntireSeries((1.0, 0.2))),
        fa.Binomial(-0.5),
        fa.Squeezed(0.5, -0.4),
    ],
    ids=repr,
)
def test_all_checks_pass(fam):
    checks = run_checks(fam, TruncationPolicy(48), seed=3)
    failed = [c for c in checks if not c.passed]
    assert not failed, failed
    assert len({c.name for c in checks}) == len(checks)


def test_explicit_points():
    checks = run_checks(fa.Canonical(), TruncationPolicy(48), zs=[0.1, 0.2j])
    assert all(c.passed for c in checks)

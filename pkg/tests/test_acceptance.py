"""Acceptance criteria, one test per criterion.

Each test prints a ``PASS``/``FAIL`` line with the measured figure before
asserting, so ``pytest -s`` (or the captured output in ``-v`` runs) shows
the outcome of every criterion.
"""
import time

import numpy as np
import pytest

from csframes import algebra as al
from csframes import families as fa
from csframes import frames as fr
from csframes import moments as mo
from csframes import nonlinearity as nl
from csframes.cli import main
from csframes.fock import FockOperator, FockVector, TruncationPolicy
from csframes.numerics import interior, is_nonincreasing
from csframes.symplectic import covariance_deviation, squeezed_wavefunction_check

# deviations below this are roundoff; ordering among them carries no information
ROUNDOFF_FLOOR = 1e-12


def report(number, ok, detail):
    print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def random_disc(rng, count, radius):
    r = radius * np.sqrt(rng.uniform(0, 1, count))
    return r * np.exp(2j * np.pi * rng.uniform(0, 1, count))


def test_criterion_01_canonical_resolution():
    t0 = time.perf_counter()
    rep = mo.frame_operator(fa.Canonical(), mo.gaussian_canonical(32), 64, TruncationPolicy(24))
    dt = time.perf_counter() - t0
    report(1, rep.operator_norm_deviation <= 1e-7 and dt < 5, f"|S-I| = {rep.operator_norm_deviation:.2e}, {dt:.2f} s")


def test_criterion_02_photon_added_overlap():
    rng = np.random.default_rng(2)
    trunc = TruncationPolicy(60)
    t0 = time.perf_counter()
    worst = 0.0
    for lam, z in zip(rng.uniform(-1, 1, 20), random_disc(rng, 20, 1.5)):
        fam = fa.PhotonAdded(float(lam))
        got = fa.evaluate(fa.dual(fam), z, trunc).vector.inner(fa.evaluate(fam, z, trunc).vector)
        want = np.exp(-lam * (lam + 2j * z.imag))
        worst = max(worst, abs(got - want))
    dt = time.perf_counter() - t0
    report(2, worst <= 1e-8 and dt < 1, f"max error {worst:.2e}, {dt:.2f} s")


def test_criterion_03_binomial_overlap_and_basis_relation():
    rng = np.random.default_rng(3)
    trunc = TruncationPolicy(60)
    worst = 0.0
    for mu, z in zip(rng.uniform(-1, 1, 20), random_disc(rng, 20, 1.5)):
        fam = fa.Binomial(float(mu))
        got = fa.evaluate(fa.dual(fam), z, trunc).vector.inner(fa.evaluate(fam, z, trunc).vector)
        worst = max(worst, abs(got - 1))
    # e^{lam a^+} phi_n = e^{lam^2/2} D(lam) (a^+ + lam)^n phi_0 / sqrt(n!)
    from csframes.fock import displacement
    from csframes.numerics import converged_block

    rel = 0.0
    for lam in (-0.8, 0.3, 1.0):
        blk, (D,) = converged_block(lambda tr: [displacement(lam, tr).matrix], trunc)
        for j in range(8):
            lhs = fa.photon_added_basis(lam, j, trunc).coeffs
            rhs = np.exp(lam ** 2 / 2) * (D @ fa.binomial_basis(lam, j, trunc).coeffs)
            rel = max(rel, float(np.max(np.abs(lhs - rhs)[:blk])))
    report(3, worst <= 1e-9 and rel <= 1e-7, f"overlap error {worst:.2e}, basis relation {rel:.2e}")


def test_criterion_04_photon_added_eigenrelation():
    rng = np.random.default_rng(4)
    trunc = TruncationPolicy(60)
    k = interior(trunc)
    a = np.diag(np.sqrt(np.arange(1, trunc.n_max)), 1)
    worst = 0.0
    for lam, z in zip(rng.uniform(-1, 1, 20), random_disc(rng, 20, 1.5)):
        v = fa.evaluate(fa.PhotonAdded(float(lam)), z, trunc).vector.coeffs
        worst = max(worst, np.linalg.norm((a @ v - (z + lam) * v)[:k]) / np.linalg.norm(v))
    report(4, worst <= 1e-8, f"max residual {worst:.2e}")


@pytest.mark.parametrize(
    "fam",
    [fa.Rescaled(s) for s in (nl.q_osc(0.9), nl.q_osc(0.5), nl.gp(1.0), nl.bg(1.0), nl.gp(2.5), nl.bg(0.5))],
    ids=lambda f: f"{f.spec.name}{f.spec.params}",
)
def test_criterion_05_duality(fam):
    rng = np.random.default_rng(5)
    L, _ = fa.domain_radius(fam)
    Ld, _ = fa.domain_radius(fa.dual(fam))
    radius = min(L.value if not L.infinite else 2.0, Ld.value if not Ld.infinite else 2.0)
    # slow geometric tails near the unit circle need a long cutoff
    trunc = TruncationPolicy(400)
    worst = 0.0
    for z in random_disc(rng, 10, 0.9 * radius):
        got = fa.evaluate(fa.dual(fam), z, trunc).vector.inner(fa.evaluate(fam, z, trunc).vector)
        worst = max(worst, abs(got - 1))
    report(5, worst <= 1e-8, f"{fam.spec.name}{fam.spec.params}: max |<dual|eta> - 1| = {worst:.2e}")


BUILTIN_SPECS = [
    nl.canonical(),
    nl.gp(1.0),
    nl.gp(2.5),
    nl.bg(1.0),
    nl.bg(0.5),
    nl.q_osc(0.3),
    nl.q_osc(0.9),
    nl.q_osc(1.1),
    nl.trapped_ion(0.1),
    nl.trapped_ion(0.1, "verbatim"),
    nl.hypergeometric((1.5,), (2.0,)),
    nl.hypergeometric((0.5, 2.0), (1.0,)),
]


@pytest.mark.parametrize("spec", BUILTIN_SPECS, ids=lambda s: f"{s.name}{s.params}")
def test_criterion_06_commutator_suite(spec):
    devs = al.commutator_suite(al.build_quad(spec, TruncationPolicy(60)))
    worst = max(devs.values())
    report(6, worst <= 1e-9, f"{spec.name}{spec.params}: max commutator deviation {worst:.2e}")


@pytest.mark.parametrize("q", [0.3, 0.5, 0.9])
def test_criterion_07_deformed_algebra(q):
    trunc = TruncationPolicy(60)
    quad = al.build_quad(nl.q_osc(q), trunc)
    rep = al.detect_deformed_algebra(quad.A, quad.A_dag, trunc)
    lam_err = abs(rep.lambda_fit - q)
    c_err = float(np.max(np.abs(rep.C_diag - 1)))
    report(7, lam_err <= 1e-10 and c_err <= 1e-9, f"q={q}: |lambda-q| = {lam_err:.2e}, |C-I| = {c_err:.2e}")


@pytest.mark.parametrize("spec", [nl.canonical(), nl.q_osc(0.9)], ids=["canonical", "q_osc0.9"])
def test_criterion_08_projective_and_contragredience(spec):
    trunc = TruncationPolicy(100)
    ns = [40, 60, 80, 100]
    ok = True
    lines = []
    for z1, z2 in [(0.3, 0.1j), (0.2 + 0.2j, -0.1 + 0.05j), (-0.1 + 0.25j, 0.15)]:
        proj = al.projective_law_sweep(spec, z1, z2, ns, trunc)
        contra = al.contragredience_sweep(spec, z1, ns, trunc)
        at100 = max(al.projective_law_check(spec, z1, z2, trunc), al.contragredience_check(spec, z1, trunc))
        ok &= at100 <= 1e-6 and is_nonincreasing(proj, ROUNDOFF_FLOOR) and is_nonincreasing(contra, ROUNDOFF_FLOOR)
        lines.append(f"z1={z1}: at n_max=100 {at100:.1e}, sweep max {max(proj + contra):.1e}")
    report(8, ok, f"{spec.name}: " + "; ".join(lines))


def test_criterion_09_convergence_radii():
    gp = fr.convergence_radius(nl.gp(1.0), n_probe=4000)
    bg = fr.convergence_radius(nl.bg(1.0), n_probe=4000)
    can = fr.convergence_radius(nl.canonical(), n_probe=4000)
    ok = (
        not gp.L.infinite
        and abs(gp.L.value - 1) <= 1e-3
        and bg.L.infinite
        and can.L.infinite
        and gp.converged
        and bg.converged
        and can.converged
    )
    report(9, ok, f"GP L={gp.L.value:.6f}, BG L={bg.L}, canonical L={can.L}")


def test_criterion_10_gelfand_ordering():
    rng = np.random.default_rng(10)
    trunc = TruncationPolicy(64)
    F = FockOperator(np.diag(1.0 + np.arange(trunc.n_max)), "diagonal", trunc)
    violations = 0
    for _ in range(100):
        c = rng.normal(size=trunc.n_max) + 1j * rng.normal(size=trunc.n_max)
        lo, mid, hi = fr.gelfand_norm_check(FockVector(c / np.linalg.norm(c), trunc), F)
        violations += not (lo <= mid <= hi)
    report(10, violations == 0, f"{violations} violations in 100 vectors")


def test_criterion_11_metaplectic_and_wavefunction():
    cov = max(covariance_deviation(u, v, 2 * np.pi, TruncationPolicy(80)) for u, v in [(2, 0.3), (0.5, -0.4)])
    xs = np.linspace(-4, 4, 161)
    wav = max(
        squeezed_wavefunction_check(u, v, q, p, xs, TruncationPolicy(150))
        for u, v, q, p in [(2, 0.3, 0.5, -0.3), (0.5, -0.4, -0.2, 0.4), (1, 0, 1.0, 0.0)]
    )
    report(11, cov <= 1e-6 and wav <= 1e-5, f"covariance {cov:.2e}, wavefunction {wav:.2e}")


def test_criterion_12_gp_moment_fit():
    t0 = time.perf_counter()
    fam = fa.GilmorePerelomov(1.0)
    targets = mo.target_moments(fa.family_spec(fam), 13)
    measure = mo.fit_discrete_measure(targets, max_n=12, tol=1e-8)
    rep = mo.frame_operator(fam, measure, 32, TruncationPolicy(16))
    dt = time.perf_counter() - t0
    ok = measure.fit_residual <= 1e-8 and rep.operator_norm_deviation <= 1e-5 and dt < 10
    report(12, ok, f"residual {measure.fit_residual:.2e}, frame deviation {rep.operator_norm_deviation:.2e}, {dt:.2f} s")


VERIFY_CONFIGS = {
    "canonical": "[family]\nkind = canonical\n[task]\nkind = verify\n",
    "q_osc": "[family]\nkind = rescaled\nnonlinearity = q_osc\nq = 0.9\n[task]\nkind = verify\n",
    "gp": "[family]\nkind = gp\nkappa = 1\n[task]\nkind = verify\n",
    "photon_added": "[family]\nkind = photon_added\nlambda = 0.5\n[task]\nkind = verify\n",
    "binomial": "[family]\nkind = binomial\nmu = 0.7\n[task]\nkind = verify\n",
    "squeezed": "[family]\nkind = squeezed\nu = 2\nv = 0.3\n[truncation]\nn_max = 48\n[task]\nkind = verify\n",
}


def test_criterion_13_determinism(tmp_path, monkeypatch):
    monkeypatch.delenv("CSFRAMES_OUT", raising=False)
    same = True
    for name, text in VERIFY_CONFIGS.items():
        cfg = tmp_path / f"{name}.cfg"
        cfg.write_text(text)
        outs = []
        for run in ("a", "b"):
            out = tmp_path / f"{name}_{run}"
            assert main(["verify", "--config", str(cfg), "--out", str(out)]) == 0
            outs.append((out / "verify.csv").read_bytes())
        same &= outs[0] == outs[1]
    report(13, same, f"{len(VERIFY_CONFIGS)} verify reports compared byte for byte")

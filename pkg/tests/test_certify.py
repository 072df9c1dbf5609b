import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpfstab.certify import (
    NOTE_T1_NONLINEAR,
    NOTE_T2_Q,
    StabilityBox,
    gronwall_bound,
    t1_certify,
    t1_lhs,
    t2_certify,
    t2_constants,
    t2_constants_from_norms,
    t2_lhs,
)
from gpfstab.config import load_spec
from gpfstab.solver import Nonlinearity, SystemSpec
from gpfstab.special_fn import gamma, mittag_leffler
from oracles import t1_oracle

# mpmath, 30 digits
T1_EX1_AT_5 = 6.457979225209991
T1_EX2_AT_3 = 219.4953465501225
OMEGA_04 = 3.382264008390612
T2_EX1 = {"psi": 81.23350808333985, "varphi": 24.32242136303001, "lhs": 9.347425458986852e31}
T2_EX2 = {"psi": 9.728246036839719, "varphi": 3.391526936757026, "lhs": 181581.4587901395}


def diag_system(alpha=0.5, mu=1.0, a=0.0, b=0.0, tau=0.5, T=1.0, f=None):
    return SystemSpec(alpha, mu, tau, T, [[a]], [[b]], f or Nonlinearity())


@pytest.fixture(scope="module")
def ex1():
    return load_spec("example1")


@pytest.fixture(scope="module")
def ex2():
    return load_spec("example2")


def test_box_validation():
    assert StabilityBox(1.0, 1.0, 2.0).ratio == 1.0
    with pytest.raises(ValueError, match="finite-time stability box"):
        StabilityBox(2.0, 1.0, 1.0)
    for bad in [(0.0, 1.0, 1.0), (1.0, 2.0, 0.0), (1.0, math.inf, 1.0)]:
        with pytest.raises(ValueError):
            StabilityBox(*bad)


# -- T1 --------------------------------------------------------------------

def test_t1_trivial_values(ex1):
    assert t1_lhs(diag_system(), 0.7) == 1.0
    assert t1_lhs(ex1.system, 0.0) == 1.0
    with pytest.raises(ValueError):
        t1_lhs(ex1.system, -1.0)


def test_t1_example1(ex1):
    assert t1_oracle(0.2, 0.8, 0.5, 5.0) == pytest.approx(T1_EX1_AT_5, rel=1e-14)
    assert t1_lhs(ex1.system, 5.0) == pytest.approx(T1_EX1_AT_5, rel=1e-12)
    cert = t1_certify(ex1.system, ex1.box)
    assert cert.certified and cert.margin == pytest.approx(8.0 - T1_EX1_AT_5, rel=1e-11)
    assert cert.notes == ()


def test_t1_example2_does_not_certify(ex2):
    # the criterion as stated exceeds c2/c1 = 10 long before T = 3
    assert t1_oracle(0.4, 0.5, 0.8, 3.0) == pytest.approx(T1_EX2_AT_3, rel=1e-14)
    cert = t1_certify(ex2.system, ex2.box)
    assert cert.lhs_at_T == pytest.approx(T1_EX2_AT_3, rel=1e-12)
    assert cert.verdict == "not-certified" and cert.margin < 0
    assert NOTE_T1_NONLINEAR in cert.notes


def test_t1_overflow_is_not_certified():
    cert = t1_certify(diag_system(alpha=0.2, a=10.0, T=5.0), StabilityBox(1.0, 1e300, 5.0))
    assert cert.lhs_at_T == math.inf and not cert.certified


def test_t1_large_norm_not_certified():
    s = diag_system(a=50.0)
    cert = t1_certify(s, StabilityBox(1.0, 2.0, 1.0))
    assert not cert.certified
    # E_0.5(50) ~ exp(2500) is beyond double range
    assert cert.lhs_at_T == math.inf


@pytest.mark.parametrize("alpha,ns,t", [(0.3, 0.7, 2.0), (0.5, 1.0, 1.0), (0.9, 0.2, 4.0)])
def test_t1_mu_one_reduces_to_caputo_criterion(alpha, ns, t):
    s = diag_system(alpha=alpha, mu=1.0, a=ns, T=t)
    ta = t**alpha
    classical = (1.0 + ns * ta / gamma(alpha + 1.0)) * mittag_leffler(alpha, ns * ta)
    assert t1_lhs(s, t) == classical
    assert t1_lhs(s, t) == pytest.approx(t1_oracle(alpha, 1.0, ns, t), rel=1e-12)


# -- T2 --------------------------------------------------------------------

def test_t2_constants_definitions():
    c = t2_constants(diag_system(alpha=0.4))
    assert c.k == pytest.approx(1.4, abs=1e-15) and c.r == pytest.approx(3.5, abs=1e-15)
    assert c.omega == pytest.approx(OMEGA_04, rel=1e-13)
    assert c.psi == 0.0 and c.varphi == 0.0


def test_t2_examples(ex1, ex2):
    for spec, ref, T in ((ex1, T2_EX1, 5.0), (ex2, T2_EX2, 3.0)):
        c = t2_constants(spec.system)
        assert c.psi == pytest.approx(ref["psi"], rel=1e-12)
        assert c.varphi == pytest.approx(ref["varphi"], rel=1e-12)
        cert = t2_certify(spec.system, spec.box)
        assert cert.lhs_at_T == pytest.approx(ref["lhs"], rel=1e-10)
        assert not cert.certified
        assert NOTE_T2_Q in cert.notes


def test_t2_at_zero(ex2):
    s = ex2.system
    c = t2_constants(s)
    expected = (3.0 ** (1.0 / s.alpha) + c.varphi) ** (1.0 / c.r)
    assert t2_lhs(s, 0.0) == pytest.approx(expected, rel=1e-14)
    for alpha in (0.2, 0.5, 0.8):
        assert t2_lhs(diag_system(alpha=alpha), 0.0) == pytest.approx(3.0 ** (1.0 / (alpha + 1.0)), rel=1e-14)
        assert t2_lhs(diag_system(alpha=alpha), 7.0) == pytest.approx(3.0 ** (1.0 / (alpha + 1.0)), rel=1e-14)


def test_t2_free_system_certifies():
    alpha = 0.5
    need = 3.0 ** (1.0 / (alpha + 1.0))
    assert t2_certify(diag_system(alpha=alpha), StabilityBox(1.0, need * 1.001, 1.0)).certified
    assert not t2_certify(diag_system(alpha=alpha), StabilityBox(1.0, need * 0.999, 1.0)).certified


def test_equal_radii_never_certify_t2(ex1):
    for s in (ex1.system, diag_system(a=1e-6)):
        assert not t2_certify(s, StabilityBox(1.0, 1.0, s.T)).certified


def test_t2_log_space(ex1):
    s = ex1.system
    # (psi + r) t ~ 3400: the numerator overflows, its r-th root does not
    c = t2_constants(s)
    log_expected = (math.log(3.0**5 * c.psi + c.r * c.varphi + c.psi * c.varphi)
                    + (c.psi + c.r) * 40.0 - math.log(c.r + c.psi)) / c.r
    assert math.log(t2_lhs(s, 40.0)) == pytest.approx(log_expected, rel=1e-13)
    assert t2_lhs(s, 1e4) == math.inf
    t = 9.0  # just past the log-space switch
    r, psi, vp = (mpmath.mpf(v) for v in (c.r, c.psi, c.varphi))
    ref = ((3**5 * r + (3**5 * psi + r * vp + psi * vp) * mpmath.exp((psi + r) * t)) / (r + psi)) ** (1 / r)
    assert t2_lhs(s, t) == pytest.approx(float(ref), rel=1e-12)


def test_t2_requires_fractional_order():
    with pytest.raises(ValueError):
        t2_constants_from_norms(1.0, 0.5, 0.1, 0.1, 0.1, 0.0)


def test_t2_constants_reproducible_from_certificate(ex2):
    cert = t2_certify(ex2.system, ex2.box)
    d = json.loads(json.dumps(cert.to_dict()))
    again = t2_constants_from_norms(d["alpha"], d["mu"], d["tau"], d["normA"], d["normB"], d["Lf"])
    assert again.to_dict() == d["constants"]


def test_certificate_json_fields(ex1):
    d = t1_certify(ex1.system, ex1.box).to_dict()
    assert set(d) == {"method", "alpha", "mu", "tau", "T", "normA", "normB", "Lf", "c1", "c2",
                      "lhs_at_T", "margin", "verdict", "notes"}
    prof = t1_certify(ex1.system, ex1.box).to_dict(with_profile=True)["profile"]
    assert len(prof["t"]) == 1024 and prof["t"][-1] == 5.0


# -- Grönwall bound --------------------------------------------------------

def test_gronwall_examples(ex1):
    s = ex1.system
    assert gronwall_bound(s, 0.98995, 0.0) == 0.98995
    assert gronwall_bound(s, 0.0, 3.0) == 0.0
    assert gronwall_bound(s, 0.98995, 5.0) == pytest.approx(0.98995 * T1_EX1_AT_5, rel=1e-12)
    with pytest.raises(ValueError):
        gronwall_bound(s, -1.0, 1.0)


# -- properties ------------------------------------------------------------

systems = st.builds(
    lambda alpha, mu, a, b, lf, T: SystemSpec(
        alpha, mu, 0.25, T, [[a, 0.1], [0.0, -a]], [[b, 0.0], [0.0, b]],
        Nonlinearity("scaled-tanh", c=lf),
    ),
    st.floats(0.2, 0.95),
    st.floats(0.1, 1.0),
    st.floats(-1.5, 1.5),
    st.floats(-1.5, 1.5),
    st.floats(0.0, 0.5),
    st.floats(0.25, 4.0),
)


@settings(max_examples=40, deadline=None)
@given(systems)
def test_lhs_profiles_nondecreasing(s):
    box = StabilityBox(1.0, 1e300, s.T)
    for cert in (t1_certify(s, box), t2_certify(s, box)):
        prof = cert.profile_lhs
        assert np.all(prof[1:] >= prof[:-1] * (1.0 - 1e-12))
        assert cert.lhs_at_T == prof[-1]


@settings(max_examples=40, deadline=None)
@given(systems, st.floats(0.01, 10.0), st.floats(1.0, 50.0), st.floats(1e-3, 1e3))
def test_verdicts_depend_only_on_ratio(s, c1, ratio, k):
    a, b = StabilityBox(c1, c1 * ratio, s.T), StabilityBox(c1 * k, c1 * ratio * k, s.T)
    for certify in (t1_certify, t2_certify):
        ca, cb = certify(s, a), certify(s, b)
        # c2 / c1 itself may round differently after scaling
        assert ca.verdict == cb.verdict or math.isclose(ca.lhs_at_T, a.ratio, rel_tol=1e-12)

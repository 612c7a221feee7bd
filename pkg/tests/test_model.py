import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from conftest import alphas_st, params_st, random_params, threshold_params
from fracmalaria.model import (
    DEFAULT_PARAMS,
    EpiState,
    ModelParams,
    alpha_power_params,
    basic_reproduction_number,
    disease_free_equilibrium,
    endemic_equilibrium,
    endemic_residual,
    equilibria,
    rhs,
    simplex_defect,
)

# mpmath, 30 digits: default rates raised to 0.9
POWERED_DEFAULT_09 = {
    "a": 0.338383461901649811301809711344,
    "nu": 0.0674641423836781657561109852905,
    "gamma": 0.029575152732566275710800459278,
    "r": 0.0674641423836781657561109852905,
    "delta": 0.00199526231496887960135245539674,
    "lambda_h": 0.0158489319246111348520210137339,
    "lambda_v": 0.12589254117941672104239541064,
}

# mpmath, term by term, default parameters, alpha = 0.9,
# state (0.6, 0.15, 0.25, 0.7, 0.3)
RHS_DEFAULT_09 = [
    -0.00977195192508986925300390107095,
    0.010933529395021164045241904453,
    -0.00116157746993129479223800338204,
    0.0200026306039884012193736133463,
    -0.0200026306039884012193736133463,
]

# Frozen after the first run; residual and interiority are checked independently.
ENDEMIC_IH_DEFAULT_1 = 0.16645218199847403

class TestParams:
    def test_probability_range(self):
        with pytest.raises(ValueError):
            DEFAULT_PARAMS.replace(b=1.2)

    @pytest.mark.parametrize("name", ["lambda_h", "lambda_v"])
    def test_birth_rates_positive(self, name):
        with pytest.raises(ValueError):
            DEFAULT_PARAMS.replace(**{name: 0.0})

    @pytest.mark.parametrize("bad", [-0.1, math.nan, math.inf])
    def test_finite_non_negative(self, bad):
        with pytest.raises(ValueError):
            DEFAULT_PARAMS.replace(nu=bad)

    def test_dict_round_trip(self):
        assert ModelParams.from_dict(DEFAULT_PARAMS.to_dict()) == DEFAULT_PARAMS

    def test_from_dict_rejects_unknown(self):
        with pytest.raises(ValueError, match="unknown"):
            ModelParams.from_dict({**DEFAULT_PARAMS.to_dict(), "mu_h": 0.1})


class TestAlphaPower:
    def test_identity_at_one(self):
        q = alpha_power_params(DEFAULT_PARAMS, 1.0)
        for name, value in q._asdict().items():
            assert value == getattr(DEFAULT_PARAMS, name)

    def test_square_root(self):
        assert alpha_power_params(DEFAULT_PARAMS.replace(a=4.0), 0.5).a == 2.0

    def test_default_table(self):
        q = alpha_power_params(DEFAULT_PARAMS, 0.9)
        for name, expect in POWERED_DEFAULT_09.items():
            assert getattr(q, name) == pytest.approx(expect, rel=1e-14)
        assert (q.b, q.m, q.c) == (DEFAULT_PARAMS.b, DEFAULT_PARAMS.m, DEFAULT_PARAMS.c)


class TestRhs:
    def test_disease_free_zero(self):
        assert np.all(rhs(0.0, disease_free_equilibrium(), DEFAULT_PARAMS, 0.8) == 0.0)

    def test_derived_values(self):
        out = rhs(0.0, [0.6, 0.15, 0.25, 0.7, 0.3], DEFAULT_PARAMS, 0.9)
        np.testing.assert_allclose(out, RHS_DEFAULT_09, rtol=1e-12, atol=1e-17)

    def test_autonomous(self):
        y = [0.6, 0.15, 0.25, 0.7, 0.3]
        assert np.array_equal(rhs(0.0, y, DEFAULT_PARAMS, 0.9), rhs(123.4, y, DEFAULT_PARAMS, 0.9))

    def test_accepts_epistate(self):
        y = EpiState(0.6, 0.15, 0.25, 0.7, 0.3)
        assert np.array_equal(rhs(0, y, DEFAULT_PARAMS, 0.9), rhs(0, y.as_array(), DEFAULT_PARAMS, 0.9))

    @given(p=params_st, alpha=alphas_st, u=st.floats(0, 1), v=st.floats(0, 1), w=st.floats(0, 1))
    def test_simplex_flow_invariance(self, p, alpha, u, v, w):
        i_h = v * (1 - u)
        y = np.array([u, i_h, 1 - u - i_h, 1 - w, w])
        assume(all(x >= 0 for x in y))
        d = rhs(0, y, p, alpha)
        assert abs(d[0] + d[1] + d[2]) <= 1e-14
        assert abs(d[3] + d[4]) <= 1e-14

    @given(
        p=params_st,
        alpha=alphas_st,
        y=st.lists(st.floats(0, 1), min_size=5, max_size=5),
        face=st.integers(0, 4),
    )
    def test_boundary_faces_point_inward(self, p, alpha, y, face):
        y = list(y)
        y[face] = 0.0
        assert rhs(0, y, p, alpha)[face] >= 0.0

    @given(p=params_st, alpha=alphas_st, y=st.lists(st.floats(0, 1), min_size=5, max_size=5))
    def test_susceptible_face_formula(self, p, alpha, y):
        y = [0.0] + list(y[1:])
        q = alpha_power_params(p, alpha)
        expect = q.lambda_h + q.nu * y[1] + q.gamma * y[2]
        assert rhs(0, y, p, alpha)[0] == pytest.approx(expect, rel=1e-12, abs=1e-15)


class TestSimplexDefect:
    @pytest.mark.parametrize(
        "y,expect",
        [
            ((1, 0, 0, 1, 0), (0.0, 0.0)),
            ((0.5, 0.3, 0.2, 0.6, 0.4), (0.0, 0.0)),
            ((0.5, 0.3, 0.1, 0.6, 0.3), (-0.1, -0.1)),
        ],
    )
    def test_values(self, y, expect):
        assert simplex_defect(y) == pytest.approx(expect, abs=1e-15)


class TestReproductionNumber:
    def test_default_is_one_and_a_half(self):
        assert basic_reproduction_number(DEFAULT_PARAMS, 1.0) == pytest.approx(1.5, rel=1e-12)

    @pytest.mark.parametrize("alpha", [0.5, 0.8, 1.0])
    def test_threshold(self, alpha):
        assert basic_reproduction_number(threshold_params(alpha=alpha), alpha) == pytest.approx(1.0, rel=1e-12)

    @given(p=params_st, alpha=alphas_st)
    def test_threshold_coherence(self, p, alpha):
        q = alpha_power_params(p, alpha)
        lhs = q.lambda_v * q.human_exit
        rhs_ = q.a**2 * q.b * q.m * q.c
        assume(abs(lhs - rhs_) > 1e-9 * max(lhs, rhs_))
        assert (basic_reproduction_number(p, alpha) < 1) == (lhs > rhs_)


class TestEquilibria:
    def test_disease_free(self):
        dfe = disease_free_equilibrium()
        assert tuple(dfe) == (1.0, 0.0, 0.0, 1.0, 0.0)
        assert simplex_defect(dfe) == (0.0, 0.0)
        assert np.max(np.abs(rhs(0, dfe, DEFAULT_PARAMS, 0.9))) <= 1e-14

    def test_default_endemic(self):
        e = endemic_equilibrium(DEFAULT_PARAMS, 1.0)
        assert e is not None
        comps = e.state.as_array()
        assert np.all((comps > 0) & (comps < 1))
        assert e.residual <= 1e-10
        assert np.max(np.abs(rhs(0, e.state, DEFAULT_PARAMS, 1.0))) <= 1e-10
        assert e.i_h_star == pytest.approx(ENDEMIC_IH_DEFAULT_1, rel=1e-10)
        assert simplex_defect(e.state) == pytest.approx((0, 0), abs=1e-12)

    @pytest.mark.parametrize("alpha", [0.6, 0.9, 1.0])
    def test_mosquito_relation(self, alpha):
        p = DEFAULT_PARAMS.replace(m=3.0)
        e = endemic_equilibrium(p, alpha)
        q = alpha_power_params(p, alpha)
        ih = e.i_h_star
        assert e.state.i_v == pytest.approx(q.a * q.c * ih / (q.lambda_v + q.a * q.c * ih), rel=1e-14)

    @pytest.mark.parametrize("scale", [0.5, 0.8, 0.99])
    def test_absent_below_threshold(self, scale):
        p = threshold_params(alpha=0.9)
        p = p.replace(m=p.m * scale**2)
        assert basic_reproduction_number(p, 0.9) < 1
        # oracle: no sign change of the scalar residual on a fine mesh
        xs = np.linspace(1e-6, 1 - 1e-6, 20001)
        vals = np.array([endemic_residual(p, 0.9, x) for x in xs])
        assert np.all(vals < 0)
        assert endemic_equilibrium(p, 0.9) is None

    def test_equilibrium_set(self):
        s = equilibria(DEFAULT_PARAMS, 1.0)
        assert s.disease_free == disease_free_equilibrium()
        assert s.endemic is not None

    def test_randomized_endemic_residuals(self, rng):
        found = 0
        for _ in range(300):
            p = random_params(rng)
            alpha = rng.choice([0.5, 0.7, 0.9, 1.0])
            e = endemic_equilibrium(p, alpha)
            r0 = basic_reproduction_number(p, alpha)
            if r0 > 1 + 1e-6:
                # the scan's left endpoint has the sign of R0 - 1, so a root
                # exists whenever the residual at i_h -> 1 is negative
                assert e is not None or endemic_residual(p, alpha, 1 - 1e-12) > 0
            if e is not None:
                found += 1
                comps = e.state.as_array()
                assert np.all((comps > 0) & (comps < 1))
                assert e.residual <= 1e-10
        assert found > 50


def test_off_simplex_root_rejected():
    # residual vanishes where lambda_h = delta * i_h; that point is off the simplex
    p = ModelParams(
        a=0.6437528126387446, b=0.12556175446944853, c=0.5166657229187521, m=1.9083700911828843,
        nu=0.3408576536793227, gamma=0.4709103027943309, r=0.41577958268170645,
        delta=0.038970090597588554, lambda_h=0.03582482137071957, lambda_v=0.32046584614610474,
    )
    ih = p.lambda_h / p.delta
    assert endemic_residual(p, 1.0, ih) == pytest.approx(0.0, abs=1e-12)
    assert basic_reproduction_number(p, 1.0) < 1
    assert endemic_equilibrium(p, 1.0) is None

import numpy as np
import pytest
from hypothesis import settings, strategies as st

from fracmalaria.model import DEFAULT_PARAMS, ModelParams, alpha_power_params

settings.register_profile("default", max_examples=200, deadline=None)
settings.load_profile("default")


def random_params(rng: np.random.Generator) -> ModelParams:
    return ModelParams(
        a=rng.uniform(0.01, 1.0),
        b=rng.uniform(0.05, 1.0),
        c=rng.uniform(0.05, 1.0),
        m=rng.uniform(0.1, 10.0),
        nu=rng.uniform(0.0, 0.5),
        gamma=rng.uniform(0.0, 0.5),
        r=rng.uniform(0.0, 0.5),
        delta=rng.uniform(0.0, 0.05),
        lambda_h=rng.uniform(0.001, 0.1),
        lambda_v=rng.uniform(0.01, 0.5),
    )


params_st = st.builds(
    ModelParams,
    a=st.floats(0.01, 1.0),
    b=st.floats(0.05, 1.0),
    c=st.floats(0.05, 1.0),
    m=st.floats(0.1, 10.0),
    nu=st.floats(0.0, 0.5),
    gamma=st.floats(0.0, 0.5),
    r=st.floats(0.0, 0.5),
    delta=st.floats(0.0, 0.05),
    lambda_h=st.floats(0.001, 0.1),
    lambda_v=st.floats(0.01, 0.5),
)

alphas_st = st.sampled_from([0.5, 0.7, 0.9, 1.0])


def threshold_params(base: ModelParams = DEFAULT_PARAMS, alpha: float = 1.0) -> ModelParams:
    """``base`` with m adjusted so that R0 = 1 exactly at ``alpha`` (algebraically)."""
    q = alpha_power_params(base, alpha)
    m = q.lambda_v * q.human_exit / (q.a * q.a * base.b * base.c)
    return base.replace(m=m)


def rk4(f, y0, h, n):
    """Classical fourth-order Runge-Kutta, fixed step; returns all n + 1 states."""
    ys = np.empty((n + 1, len(y0)))
    ys[0] = y = np.asarray(y0, dtype=float)
    t = 0.0
    for k in range(n):
        k1 = f(t, y)
        k2 = f(t + h / 2, y + h / 2 * k1)
        k3 = f(t + h / 2, y + h / 2 * k2)
        k4 = f(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
        ys[k + 1] = y
    return ys


def central_jacobian(fun, x, step=1e-6):
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        cols.append((fun(x + e) - fun(x - e)) / (2 * step))
    return np.column_stack(cols)


@pytest.fixture
def rng():
    return np.random.default_rng(20160301)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

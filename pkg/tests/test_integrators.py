import math

import numpy as np
import pytest

from kpsplit.dg import DGGrid
from kpsplit.errors import Divergence, InvalidArgument, StepRejected
from kpsplit.integrators import (
    Scheme, SchemeConfig, default_dg_grid, evolve, exp2_step, strang_step, with_tau,
)
from kpsplit.initial import schwartzian
from kpsplit.spectral import GridField2D, KPParams, apply_propagator

L = 10 * math.pi


def smooth(n=64, ny=32, amp=0.05):
    # odd in x, so every row has zero mean and the constraint modes are empty
    return GridField2D.sample(lambda x, y: amp * (x / 5) * np.exp(-(x * x + 0.5 * y * y) / 20), n, ny, L, L)


def cfg(scheme, tau, n, **kw):
    return SchemeConfig(scheme, tau, n, **kw)


def test_config_validation():
    with pytest.raises(InvalidArgument):
        cfg("strang", 0.0, 1)
    with pytest.raises(InvalidArgument):
        cfg("exp2", -0.1, 1)
    with pytest.raises(InvalidArgument):
        cfg("strang", 0.1, 0)
    with pytest.raises(InvalidArgument):
        cfg("strang", 0.1, 1, transfer="auto")
    with pytest.raises(ValueError):
        cfg("rk4", 0.1, 1)
    c = SchemeConfig.for_final_time("exp2", 0.025, 0.1)
    assert c.n_steps == 4 and c.t_final == pytest.approx(0.1)
    with pytest.raises(InvalidArgument):
        SchemeConfig.for_final_time("exp2", 0.03, 0.1)
    assert with_tau(c, 0.05, 0.1).n_steps == 2
    with pytest.raises(InvalidArgument):
        with_tau(c, 0.3, 0.1)


def test_default_grid():
    g = default_dg_grid(64, L, 4)
    assert g.n_cells == 16 and g.a == -L and g.b == L
    assert default_dg_grid(64, L, 4, 2.0).dof == 128
    with pytest.raises(InvalidArgument):
        default_dg_grid(2, L, 8)


@pytest.mark.parametrize("scheme", ["strang", "exp2"])
def test_zero_stays_zero(scheme):
    u = GridField2D(np.zeros((8, 16)), L, L)
    step = strang_step if scheme == "strang" else exp2_step
    assert not np.any(step(u, cfg(scheme, 0.01, 1)).values)


@pytest.mark.parametrize("transfer", ["projection", "local", "cell"])
def test_strang_row_constant_data_is_linear_flow(transfer):
    n = 512
    u = GridField2D.sample(lambda x, y: 0.3 * np.cos(y / 10) + 0 * x, n, n, L, L)
    out = strang_step(u, cfg("strang", 1e-2, 1, transfer=transfer))
    assert np.max(np.abs(out.values - apply_propagator(u, 1e-2, KPParams()).values)) <= 1e-10


def test_exp2_row_constant_data_is_linear_flow():
    u = GridField2D.sample(lambda x, y: 0.3 * np.cos(y / 10) + 0 * x, 64, 64, L, L)
    out = exp2_step(u, cfg("exp2", 1e-2, 1))
    assert np.max(np.abs(out.values - apply_propagator(u, 1e-2, KPParams()).values)) <= 1e-12


def test_step_functions_check_scheme():
    u = smooth()
    with pytest.raises(InvalidArgument):
        strang_step(u, cfg("exp2", 0.01, 1))
    with pytest.raises(InvalidArgument):
        exp2_step(u, cfg("strang", 0.01, 1))


@pytest.mark.parametrize("scheme", ["strang", "exp2"])
def test_one_step_evolve_matches_step(scheme):
    u = smooth()
    c = cfg(scheme, 0.01, 1)
    step = strang_step(u, c) if scheme == "strang" else exp2_step(u, c)
    assert np.max(np.abs(evolve(u, c).values - step.values)) < 1e-14


def test_fused_and_unfused_agree():
    u = smooth(amp=0.5)
    a = evolve(u, cfg("strang", 0.01, 10, fuse_half_steps=True))
    b = evolve(u, cfg("strang", 0.01, 10, fuse_half_steps=False))
    assert np.max(np.abs(a.values - b.values)) < 1e-11


def test_strang_time_reversal():
    # the dG substep is reversible up to its projection error, so resolve it well
    u = smooth(n=512, amp=0.5)
    fwd = strang_step(u, cfg("strang", 0.01, 1), order=6)
    back = strang_step(fwd, cfg("strang", -0.01, 1), order=6)
    assert np.max(np.abs(back.values - u.values)) < 5e-10


@pytest.mark.parametrize("lam", [-1, 1])
def test_nonlinearity_off_reduces_to_propagator(lam):
    p = KPParams(0.1, lam)
    u = GridField2D.sample(lambda x, y: schwartzian(x, y), 64, 64, L, L)
    out = evolve(u, cfg("strang", 0.01, 20, params=p, nonlinear_coeff=0.0))
    ref = apply_propagator(u, 0.2, p)
    assert np.max(np.abs(out.values - ref.values)) < 1e-12
    out = evolve(u, cfg("exp2", 0.01, 20, params=p, nonlinear_coeff=0.0))
    assert np.max(np.abs(out.values - ref.values)) < 1e-12


def test_observers_stride_and_final():
    seen = []
    u = smooth()
    evolve(u, cfg("strang", 0.01, 7), observers=[lambda n, t, s: seen.append((n, t))], stride=3)
    assert [n for n, _ in seen] == [0, 3, 6, 7]
    assert seen[-1][1] == pytest.approx(0.07)
    seen.clear()
    evolve(u, cfg("exp2", 0.01, 7), observers=[lambda n, t, s: seen.append(n)], stride=3)
    assert seen == [0, 3, 6, 7]
    with pytest.raises(InvalidArgument):
        evolve(u, cfg("exp2", 0.01, 1), stride=0)


def test_observer_state_equals_shorter_run():
    u = smooth(amp=0.5)
    states = {}
    evolve(u, cfg("strang", 0.01, 6), observers=[lambda n, t, s: states.setdefault(n, s.values.copy())],
           stride=2)
    short = evolve(u, cfg("strang", 0.01, 4))
    assert np.max(np.abs(states[4] - short.values)) < 1e-12


def test_observer_exception_aborts():
    def boom(n, t, s):
        if n == 2:
            raise RuntimeError("stop")

    with pytest.raises(RuntimeError):
        evolve(smooth(), cfg("strang", 0.01, 5), observers=[boom])


def test_exp2_divergence_names_step():
    u = GridField2D.sample(lambda x, y: 50 * np.exp(-(x * x + y * y)), 64, 64, L, L)
    with pytest.raises(Divergence) as info:
        evolve(u, cfg("exp2", 0.5, 200))
    assert info.value.step >= 1


def test_strang_rejection_carries_time():
    u = GridField2D.sample(lambda x, y: 5 * np.sin(x) + 0 * y, 64, 4, math.pi, 1.0)
    with pytest.raises(StepRejected) as info:
        evolve(u, cfg("strang", 0.2, 5))
    assert info.value.time is not None


def test_strang_grid_must_match_domain():
    u = smooth()
    bad = DGGrid.uniform(0, 2 * L, 16, 4)
    with pytest.raises(InvalidArgument):
        evolve(u, cfg("strang", 0.01, 1, dg_grid=bad))


def test_initial_value_must_be_finite():
    u = GridField2D(np.full((4, 4), np.nan), L, L)
    with pytest.raises(InvalidArgument):
        evolve(u, cfg("exp2", 0.01, 1))


def test_schemes_agree_on_resolved_problem():
    p = KPParams(1.0, 1)
    u = smooth(n=256, ny=32, amp=0.2)
    runs = {s: [evolve(u, cfg(s, tau, round(0.2 / tau), params=p)).values for tau in (0.01, 0.005)]
            for s in ("strang", "exp2")}
    # Richardson estimate of the time error of the fine run of each scheme
    est = max(np.max(np.abs(a - b)) / 3 for a, b in runs.values())
    assert np.max(np.abs(runs["strang"][1] - runs["exp2"][1])) <= 10 * est


def test_strang_conserves_mean():
    u = smooth(amp=0.5)
    out = evolve(u, cfg("strang", 0.01, 10))
    assert abs(out.mean() - u.mean()) < 1e-7


def test_scheme_enum():
    assert Scheme("exp2") is Scheme.EXP2

"""Encoding of system models and formulas into MILPs, and decoding."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stl_gen import random_formula
from stldiv.benchmarks import get_benchmark
from stldiv.encoder import DecodeError, EncodingConfig, decode, encode
from stldiv.milp import Solution, Status, solve
from stldiv.stl import Atom, NegAtom, eval_boolean, parse, subformulas, tighten
from stldiv.stl.monitor import satisfaction_signal
from stldiv.system import (
    DoubleIntegrator,
    IntegratorLink,
    PiecewiseConstantInput,
    SystemModel,
    Variable,
)

seeds = st.integers(0, 2**32 - 1)


def free_system(*names, lo=-1.0, hi=1.0):
    return SystemModel([Variable(n, lo, hi) for n in names], {}, [])


def running_example():
    sysm = SystemModel(
        [Variable("x", 0, 40), Variable("v", -5, 5), Variable("a", -3, 3)],
        {"x": (0, 0), "v": (0, 0), "a": (0, 0)},
        [DoubleIntegrator("x", "v", "a")],
    )
    return sysm, parse("Ev(BoundedAlw([0,5], x <= 10))", sysm.names)


def synth(system, phi, N, T, engine="highs", **kw):
    model, handles = encode(system, phi, EncodingConfig(bound=N, horizon=T, **kw))
    sol = solve(model, engine=engine)
    return model, handles, sol


class TestExamples:
    @pytest.mark.parametrize("engine", ["simplex", "highs"])
    def test_single_cell_atom(self, engine):
        sysm = free_system("x")
        phi = parse("x >= 0", sysm.names)
        _, handles, sol = synth(sysm, phi, N=1, T=1.0, engine=engine, delta=0.01)
        assert sol.status == Status.OPTIMAL
        tr = decode(handles, sol)
        assert np.all(tr.tss.states[:, 0] >= 0.01 - 1e-9)

    def test_contradiction_infeasible(self):
        sysm = free_system("x")
        phi = parse("x >= 0 && !(x >= 0)", sysm.names)
        assert synth(sysm, phi, N=3, T=1.0)[2].status == Status.INFEASIBLE

    def test_running_example(self):
        sysm, phi = running_example()
        model, handles, sol = synth(sysm, phi, N=10, T=20.0)
        assert sol.status == Status.OPTIMAL
        tr = decode(handles, sol)
        assert eval_boolean(tr.tss, phi, 0.0, 0.01)
        assert len(handles.valuation) == 3 * 10

    def test_root_bit_fixed(self):
        sysm, phi = running_example()
        _, handles, sol = synth(sysm, phi, N=10, T=20.0)
        root = handles.table.index(phi)
        assert sol[handles.valuation[root, 1]] == 1.0

    def test_undeclared_variable(self):
        with pytest.raises(ValueError):
            encode(free_system("x"), parse("y >= 0"), EncodingConfig(bound=2, horizon=1.0))

    def test_requires_nnf(self):
        from stldiv.stl import Not

        with pytest.raises(ValueError):
            encode(free_system("x"), Not(parse("x >= 0")), EncodingConfig(bound=2, horizon=1.0))

    @pytest.mark.parametrize("kw", [dict(bound=0), dict(delta=0.0), dict(min_width=0.6),
                                    dict(horizon=0.0)])
    def test_config_validation(self, kw):
        args = {"bound": 2, "horizon": 1.0, **kw}
        with pytest.raises(ValueError):
            EncodingConfig(**args)


class TestDecode:
    def handles(self):
        sysm = free_system("x", lo=-5, hi=5)
        return encode(sysm, parse("x >= 0", sysm.names), EncodingConfig(bound=2, horizon=2.0))

    def solution(self, model, handles, bit=1.0):
        x = np.zeros(model.num_vars)
        for i, g in enumerate(handles.gamma):
            x[g.id] = float(i)
            x[handles.state[i, "x"].id] = float(i)
        for v in handles.valuation.values():
            x[v.id] = bit
        return Solution(Status.OPTIMAL, x, 0.0)

    def test_exact_values(self):
        model, h = self.handles()
        tr = decode(h, self.solution(model, h))
        assert tr.tss.gammas.tolist() == [0.0, 1.0, 2.0]
        assert tr.tss.states[:, 0].tolist() == [0.0, 1.0, 2.0]

    def test_near_integral_bit_rounds(self):
        model, h = self.handles()
        tr = decode(h, self.solution(model, h, bit=0.9999999))
        assert tr.valuations == {0: "11"}

    def test_fractional_bit_rejected(self):
        model, h = self.handles()
        with pytest.raises(DecodeError):
            decode(h, self.solution(model, h, bit=0.5))

    def test_no_assignment(self):
        _, h = self.handles()
        with pytest.raises(DecodeError):
            decode(h, Solution(Status.INFEASIBLE))


@pytest.fixture(scope="module")
def dstop_solution():
    spec = get_benchmark("dstop")
    phi = spec.phi()
    model, handles = encode(spec.system, phi, spec.encoding_config())
    sol = solve(model, engine="highs")
    assert sol.status.has_solution
    return spec, phi, handles, sol, decode(handles, sol)


class TestDecodedTraces:
    def test_sound(self, dstop_solution):
        _, phi, _, _, tr = dstop_solution
        assert eval_boolean(tr.tss, phi, 0.0, 0.01)

    def test_partition_legal(self, dstop_solution):
        spec, _, handles, _, tr = dstop_solution
        g = tr.tss.gammas
        assert g[0] == 0.0 and g[-1] == spec.horizon
        assert np.all(np.diff(g) >= handles.config.min_width - 1e-9)

    def test_double_integrator_recurrences(self, dstop_solution):
        _, _, _, _, tr = dstop_solution
        g = tr.tss.gammas
        w = np.diff(g)
        for car in ("r", "f"):
            x, v, a = (tr.tss.column(f"{s}_{car}") for s in ("x", "v", "a"))
            assert a[0] == pytest.approx(a[1], abs=1e-9)  # input node 0 repeats cell 1
            assert np.max(np.abs(v[1:] - v[:-1] - a[1:] * w)) <= 1e-6
            assert np.max(np.abs(x[1:] - x[:-1] - 0.5 * (v[:-1] + v[1:]) * w)) <= 1e-6

    def test_matches_exact_ode_flow(self, dstop_solution):
        """Integrate the ODE in closed form per cell and compare the nodes."""
        _, _, _, _, tr = dstop_solution
        g = tr.tss.gammas
        for car in ("r", "f"):
            x, v, a = (tr.tss.column(f"{s}_{car}") for s in ("x", "v", "a"))
            xs, vs = x[0], v[0]
            for i in range(1, len(g)):
                dt = g[i] - g[i - 1]
                xs, vs = xs + vs * dt + 0.5 * a[i] * dt * dt, vs + a[i] * dt
                assert xs == pytest.approx(x[i], abs=1e-6)
                assert vs == pytest.approx(v[i], abs=1e-6)

    def test_tightened_atom_certificates(self, dstop_solution):
        spec, phi, handles, sol, tr = dstop_solution
        delta = handles.config.delta
        g = tr.tss.gammas
        checked = 0
        for k, f in enumerate(handles.table):
            if not isinstance(f, (Atom, NegAtom)):
                continue
            tight = tighten(f, delta)
            for i in range(1, len(g)):
                if tr.valuations[k][i - 1] != "1":
                    continue
                ts = np.linspace(g[i - 1], g[i], 41)
                vals = tr.tss.values_at(ts)
                at = tight.atom
                col = {v: j for j, v in enumerate(tr.variables)}
                pi = sum(c * vals[:, col[v]] for v, c in at.coeffs) + at.offset
                assert np.all(pi >= -1e-6)
                checked += 1
        assert checked > 0

    def test_every_certificate_bit_holds(self, dstop_solution):
        _, _, handles, _, tr = dstop_solution
        g = tr.tss.gammas
        for k, f in enumerate(handles.table):
            for i in range(1, len(g)):
                if tr.valuations[k][i - 1] == "1":
                    ts = np.linspace(g[i - 1], g[i], 9)
                    assert satisfaction_signal(tr.tss, f, ts).all(), (str(f), i)


@pytest.fixture(scope="module")
def nav_solution():
    spec = get_benchmark("nav2")
    model, handles = encode(spec.system, spec.phi(), spec.encoding_config())
    sol = solve(model, engine="highs")
    assert sol.status.has_solution
    return spec, handles, sol, decode(handles, sol)


class TestRha:
    def test_one_location_per_cell(self, nav_solution):
        spec, handles, sol, _ = nav_solution
        rha = spec.system.automata()[0]
        for i in range(1, handles.config.bound + 1):
            assert sum(round(sol[handles.locations[i, loc.name]]) for loc in rha.locations) == 1

    def test_flows_and_invariants(self, nav_solution):
        spec, handles, sol, tr = nav_solution
        rha = spec.system.automata()[0]
        g = tr.tss.gammas
        for i in range(1, len(g)):
            (loc,) = [l for l in rha.locations if round(sol[handles.locations[i, l.name]]) == 1]
            if i == 1:
                assert loc.name in rha.initial
            w = g[i] - g[i - 1]
            for v, (clo, chi) in loc.flow.items():
                d = tr.tss.column(v)[i] - tr.tss.column(v)[i - 1]
                assert clo * w - 1e-6 <= d <= chi * w + 1e-6
            for v, (blo, bhi) in loc.invariant.items():
                for j in (i - 1, i):
                    assert blo - 1e-6 <= tr.tss.column(v)[j] <= bhi + 1e-6

    def test_sound(self, nav_solution):
        spec, _, _, tr = nav_solution
        assert eval_boolean(tr.tss, spec.phi(), 0.0, 0.01)


def small_systems():
    free = free_system("x", "y", lo=-5, hi=5)
    integ = SystemModel(
        [Variable("x", -5, 5), Variable("y", -2, 2)],
        {"x": (0, 0)},
        [PiecewiseConstantInput("y"), IntegratorLink("x", "y")],
    )
    return [free, integ]


@settings(max_examples=40)
@given(seeds, st.integers(0, 1), st.integers(2, 5))
def test_random_formulas_decode_soundly(seed, which, N):
    """Whatever the solver returns must pass the monitor, bit by bit."""
    rng = np.random.default_rng(seed)
    phi = random_formula(rng, depth=2)
    sysm = small_systems()[which]
    _, handles, sol = synth(sysm, phi, N=N, T=10.0, time_lattice=20)
    if not sol.status.has_solution:
        return
    tr = decode(handles, sol)
    assert eval_boolean(tr.tss, phi, 0.0, 0.01)
    g = tr.tss.gammas
    for k, f in enumerate(subformulas(phi)):
        for i in range(1, N + 1):
            if tr.valuations[k][i - 1] == "1":
                ts = np.linspace(g[i - 1], g[i], 5)
                assert satisfaction_signal(tr.tss, f, ts).all()

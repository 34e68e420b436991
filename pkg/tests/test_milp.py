"""MILP model, linearization helpers, the built-in solver and LP export."""
import re

import highspy
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from milp_gen import enumerate_optimum, random_model
from stldiv.milp import (
    MilpModel,
    SolverParams,
    Status,
    branch_and_bound,
    export_lp,
    linearize_abs,
    solve,
)
from stldiv.milp.simplex import solve_lp

ENGINES = ["simplex", "highs"]
seeds = st.integers(0, 2**32 - 1)


class TestModel:
    def test_binary_bounds(self):
        b = MilpModel().add_binary("b")
        assert (b.lower, b.upper, b.is_binary) == (0.0, 1.0, True)

    def test_real_bounds_stored(self):
        x = MilpModel().add_real("x", -5, 5)
        assert (x.lower, x.upper) == (-5.0, 5.0)

    def test_undeclared_variable(self):
        m = MilpModel()
        other = MilpModel()
        other.add_real("a", 0, 1)
        y = other.add_real("y", 0, 1)
        with pytest.raises(ValueError):
            m.le(y, 1.0)

    def test_duplicate_name(self):
        m = MilpModel()
        m.add_real("x", 0, 1)
        with pytest.raises(ValueError):
            m.add_binary("x")

    def test_infinite_bound(self):
        with pytest.raises(ValueError):
            MilpModel().add_real("x", 0, float("inf"))

    def test_binary_bounds_validated(self):
        with pytest.raises(ValueError):
            MilpModel().add_var("b", 0, 2, "binary")

    def test_strict_sense_rejected(self):
        m = MilpModel()
        x = m.add_real("x", 0, 1)
        with pytest.raises(ValueError):
            m.add_constraint(x, "<", 1.0)

    def test_big_m_from_bounds(self):
        m = MilpModel()
        x = m.add_real("x", -2, 3)
        y = m.add_real("y", 0, 4)
        assert m.bounds_of(2 * x - y + 1) == (-7.0, 7.0)
        assert m.big_m(2 * x - y + 1) == 8.0

    def test_sealed(self):
        m = MilpModel()
        m.seal()
        with pytest.raises(RuntimeError):
            m.add_real("x", 0, 1)


class TestAbs:
    @pytest.mark.parametrize("engine", ENGINES)
    @pytest.mark.parametrize("yval,expected", [(3.0, 3.0), (-3.0, 3.0), (0.0, 0.0)])
    def test_fixed_argument(self, engine, yval, expected):
        m = MilpModel()
        y = m.add_real("y", -10, 10)
        m.eq(y, yval)
        z = linearize_abs(m, y, big_m=10.0)
        m.set_objective(-1 * z)
        sol = solve(m, engine=engine)
        assert sol.status == Status.OPTIMAL
        assert sol[z] == pytest.approx(expected, abs=1e-9)

    @pytest.mark.parametrize("engine", ENGINES)
    def test_maximized_abs_is_exact(self, engine):
        m = MilpModel()
        y = m.add_real("y", -2, 1)
        z = linearize_abs(m, y)
        m.set_objective(z)
        sol = solve(m, engine=engine)
        assert sol.objective == pytest.approx(2.0, abs=1e-9)
        assert sol[z] == pytest.approx(abs(sol[y]), abs=1e-6)

    def test_big_m_must_cover_range(self):
        m = MilpModel()
        y = m.add_real("y", -10, 10)
        with pytest.raises(ValueError):
            linearize_abs(m, y, big_m=5.0)


class TestSolveExamples:
    @pytest.mark.parametrize("engine", ENGINES)
    def test_lp_only(self, engine):
        m = MilpModel()
        x = m.add_real("x", 0, 10)
        m.le(x, 3)
        m.set_objective(x)
        sol = solve(m, engine=engine)
        assert sol.status == Status.OPTIMAL and sol.objective == pytest.approx(3.0, abs=1e-9)

    @pytest.mark.parametrize("engine", ENGINES)
    def test_two_binaries(self, engine):
        m = MilpModel()
        b1, b2 = m.add_binary("b1"), m.add_binary("b2")
        m.le(b1 + b2, 1)
        m.set_objective(2 * b1 + 3 * b2)
        sol = solve(m, engine=engine)
        assert sol.objective == pytest.approx(3.0, abs=1e-9)
        assert sol[b2] == 1.0 and sol[b1] == 0.0

    @pytest.mark.parametrize("engine", ENGINES)
    def test_infeasible_binary(self, engine):
        m = MilpModel()
        b = m.add_binary("b")
        m.ge(b, 0.6)
        m.le(b, 0.4 + 0 * b)
        assert solve(m, engine=engine).status == Status.INFEASIBLE

    def test_unknown_engine(self):
        with pytest.raises(ValueError):
            solve(MilpModel(), engine="gurobi")

    def test_timeout_without_incumbent_is_distinct(self):
        rng = np.random.default_rng(0)
        m = MilpModel()
        bs = [m.add_binary(f"b{i}") for i in range(30)]
        w = rng.integers(5, 30, size=30)
        m.le(sum(float(wi) * b for wi, b in zip(w, bs)), float(w.sum() // 2))
        m.set_objective(sum((float(wi) + 0.37 * i) * b for i, (wi, b) in enumerate(zip(w, bs))))
        sol = branch_and_bound(m, SolverParams(timeout=0.0))
        assert sol.status == Status.TIMEOUT and sol.values is None


class TestSimplex:
    def test_matches_highs_on_random_lps(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            n, mu, me = int(rng.integers(1, 7)), int(rng.integers(0, 6)), int(rng.integers(0, 3))
            c = rng.integers(-5, 6, n).astype(float)
            A_ub = rng.integers(-3, 4, (mu, n)).astype(float)
            b_ub = rng.integers(-2, 8, mu).astype(float)
            A_eq = rng.integers(-3, 4, (me, n)).astype(float)
            b_eq = rng.integers(-2, 5, me).astype(float)
            lb = rng.integers(-4, 1, n).astype(float)
            ub = lb + rng.integers(0, 6, n)
            res = solve_lp(c, A_ub, b_ub, A_eq, b_eq, lb, ub)
            h = highspy.Highs()
            h.setOptionValue("output_flag", False)
            inf = highspy.kHighsInf
            h.addVars(n, lb, ub)
            h.changeColsCost(n, np.arange(n, dtype=np.int32), -c)
            for row, rhs in zip(A_ub, b_ub):
                idx = np.flatnonzero(row).astype(np.int32)
                h.addRow(-inf, rhs, len(idx), idx, row[idx])
            for row, rhs in zip(A_eq, b_eq):
                idx = np.flatnonzero(row).astype(np.int32)
                h.addRow(rhs, rhs, len(idx), idx, row[idx])
            h.run()
            ok = h.getModelStatus() == highspy.HighsModelStatus.kOptimal
            assert (res.status == "optimal") == ok
            if ok:
                assert res.objective == pytest.approx(-h.getInfo().objective_function_value, abs=1e-6)


class TestOracle:
    @settings(max_examples=40)
    @given(seeds, st.booleans())
    def test_matches_enumeration(self, seed, with_abs):
        model, abs_pairs = random_model(np.random.default_rng(seed), with_abs=with_abs)
        status, opt = enumerate_optimum(model)
        sol = branch_and_bound(model)
        assert sol.status == status
        if status == Status.OPTIMAL:
            assert sol.objective == pytest.approx(opt, abs=1e-6)
            for z, y in abs_pairs:
                assert sol[z] == pytest.approx(abs(y.value(sol.values)), abs=1e-6)

    @settings(max_examples=40)
    @given(seeds)
    def test_feasibility_certificate(self, seed):
        model, _ = random_model(np.random.default_rng(seed), with_abs=True)
        for engine in ENGINES:
            sol = solve(model, engine=engine)
            if sol.status.has_solution:
                assert model.max_violation(sol.values) <= 1e-6
                assert model.is_integral(sol.values)

    @settings(max_examples=25)
    @given(seeds)
    def test_deterministic(self, seed):
        model, _ = random_model(np.random.default_rng(seed), with_abs=True)
        for engine in ENGINES:
            a, b = solve(model, engine=engine), solve(model, engine=engine)
            assert a.status == b.status
            if a.values is not None:
                assert np.array_equal(a.values, b.values)

    @settings(max_examples=40)
    @given(seeds)
    def test_monotone_incumbents(self, seed):
        model, _ = random_model(np.random.default_rng(seed), max_bin=12)
        objs = [o for _, o in branch_and_bound(model).incumbents]
        assert all(a <= b for a, b in zip(objs, objs[1:]))


class TestExport:
    def small(self):
        m = MilpModel("demo")
        x = m.add_real("x", 0, 10)
        m.le(x, 3)
        m.set_objective(x)
        return m

    def test_skeleton(self):
        text = export_lp(self.small())
        for section in ("Maximize", "Subject To", "Bounds", "End"):
            assert section in text
        assert "Binary" not in text

    def test_binaries_listed_once(self):
        m = MilpModel()
        bs = [m.add_binary(f"b{i}") for i in range(5)]
        m.le(sum(bs), 2)
        m.set_objective(sum(bs))
        lines = export_lp(m).splitlines()
        section = lines[lines.index("Binary") + 1 : lines.index("End")]
        assert sorted(s.strip() for s in section) == sorted(b.name for b in bs)

    def test_names_sanitized_and_unique(self):
        m = MilpModel()
        m.add_real("x[1]", 0, 1)
        m.add_real("x(1)", 0, 1)
        m.add_real("2y", 0, 1)
        text = export_lp(m)
        lines = text.splitlines()
        bounds = lines[lines.index("Bounds") + 1 : lines.index("End")]
        bound_names = [ln.split("<=")[1].strip() for ln in bounds]
        assert len(set(bound_names)) == 3
        assert all(re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", n) for n in bound_names)

    def test_deterministic_text(self):
        model, _ = random_model(np.random.default_rng(5), with_abs=True)
        assert export_lp(model) == export_lp(model)

    def test_external_reparse_matches(self, tmp_path):
        rng = np.random.default_rng(2024)
        for k in range(50):
            model, _ = random_model(rng, with_abs=bool(k % 2))
            path = tmp_path / f"m{k}.lp"
            path.write_text(export_lp(model))
            h = highspy.Highs()
            h.setOptionValue("output_flag", False)
            h.readModel(str(path))
            h.run()
            ext = h.getModelStatus()
            sol = branch_and_bound(model)
            if sol.status == Status.OPTIMAL:
                assert ext == highspy.HighsModelStatus.kOptimal
                assert h.getInfo().objective_function_value == pytest.approx(sol.objective, abs=1e-6)
            else:
                assert sol.status == Status.INFEASIBLE
                assert ext == highspy.HighsModelStatus.kInfeasible

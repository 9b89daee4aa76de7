import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coplan import lp as lpm
from coplan.lp import EQ, GE, INF, LE, LinearProgram, LpError, export_lp, read_lp, solve
from oracles import vertex_minimum


def two_var():
    p = LinearProgram("two")
    x = p.add_column("x", 0, INF, 1.0)
    y = p.add_column("y", 0, INF, 1.0)
    r1 = p.add_row("c1", GE, 4.0)
    r2 = p.add_row("c2", GE, 6.0)
    p.set_coeff(r1, x, 1.0)
    p.set_coeff(r1, y, 2.0)
    p.set_coeff(r2, x, 3.0)
    p.set_coeff(r2, y, 1.0)
    return p.finalize()


def test_add_column_returns_id():
    p = LinearProgram()
    assert p.add_column("x", 0, INF, 1) == 0
    assert p.add_column("y") == 1


def test_unknown_ids_rejected():
    p = LinearProgram()
    c = p.add_column("x")
    with pytest.raises(LpError):
        p.set_coeff(5, c, 1.0)
    p.add_row("r", LE, 1.0)
    with pytest.raises(LpError):
        p.set_coeff(0, 3, 1.0)


def test_inverted_bounds_rejected():
    p = LinearProgram()
    with pytest.raises(LpError):
        p.add_column("x", 2.0, 1.0)
    c = p.add_column("y")
    with pytest.raises(LpError):
        p.set_bounds([c], 3.0, 1.0)


def test_repeated_set_coeff_overwrites():
    p = LinearProgram()
    c = p.add_column("x")
    r = p.add_row("r", LE, 1.0)
    p.set_coeff(r, c, 1.0)
    p.set_coeff(r, c, 2.0)
    p.finalize()
    assert p.coefficient(r, c) == 2.0
    assert p.nnz == 1


def test_finalized_program_is_frozen():
    p = two_var()
    with pytest.raises(LpError):
        p.add_column("z")


def test_lower_bound_row():
    p = LinearProgram()
    x = p.add_column("x", 0, INF, 1.0)
    r = p.add_row("r", GE, 3.0)
    p.set_coeff(r, x, 1.0)
    sol = solve(p)
    assert sol.status == lpm.OPTIMAL
    assert sol.objective == pytest.approx(3.0, rel=1e-9)


def test_unbounded():
    p = LinearProgram()
    p.add_column("x", 0, INF, -1.0)
    assert solve(p).status == lpm.UNBOUNDED


def test_infeasible():
    p = LinearProgram()
    x = p.add_column("x", 0, 1.0, 1.0)
    r = p.add_row("r", GE, 2.0)
    p.set_coeff(r, x, 1.0)
    assert solve(p).status == lpm.INFEASIBLE


def test_two_constraint_vertex():
    p = two_var()
    sol = solve(p)
    # the optimum sits where both rows are tight: x + 2y = 4, 3x + y = 6
    vertex = np.linalg.solve([[1.0, 2.0], [3.0, 1.0]], [4.0, 6.0])
    assert sol.objective == pytest.approx(vertex.sum(), rel=1e-9)
    assert sol.objective == pytest.approx(
        vertex_minimum(p.c, np.empty((0, 2)), np.empty(0), np.vstack([-p.A.toarray(), -np.eye(2)]),
                       np.array([-4.0, -6.0, 0.0, 0.0])), rel=1e-9)
    assert not p.violations(sol.x)


@pytest.mark.parametrize("method", sorted(lpm.SOLVERS))
def test_every_registered_solver(method):
    sol = solve(two_var(), method)
    assert sol.optimal and sol.objective == pytest.approx(2.8, rel=1e-9)


def test_solver_from_environment(monkeypatch):
    monkeypatch.setenv(lpm.SOLVER_ENV, "highs-ds")
    assert lpm.get_solver().name == "highs-ds"
    monkeypatch.setenv(lpm.SOLVER_ENV, "nope")
    with pytest.raises(LpError):
        lpm.get_solver()


def test_repeat_solves_identical():
    p = two_var()
    a, b = solve(p), solve(p)
    assert a.status == b.status
    assert abs(a.objective - b.objective) <= 1e-12 * abs(a.objective)
    assert np.array_equal(a.x, b.x)


@st.composite
def small_lps(draw):
    n = draw(st.integers(1, 3))
    m = draw(st.integers(1, 4))
    vals = st.integers(-5, 5).map(float)
    A = np.array(draw(st.lists(st.lists(vals, min_size=n, max_size=n), min_size=m, max_size=m)))
    b = np.array(draw(st.lists(st.integers(-5, 10).map(float), min_size=m, max_size=m)))
    c = np.array(draw(st.lists(st.integers(0, 5).map(float), min_size=n, max_size=n)))
    return A, b, c


@settings(max_examples=60, deadline=None)
@given(small_lps())
def test_matches_vertex_enumeration(data):
    A, b, c = data
    n = len(c)
    p = LinearProgram()
    ids = p.add_columns([f"x{j}" for j in range(n)], 0.0, 10.0, c)
    rows = p.add_rows([f"r{i}" for i in range(len(b))], LE, b)
    for i in range(len(b)):
        p.add_coeffs(rows[i], ids, A[i])
    sol = solve(p)
    A_le = np.vstack([A, -np.eye(n), np.eye(n)])
    b_le = np.concatenate([b, np.zeros(n), np.full(n, 10.0)])
    ref = vertex_minimum(c, np.empty((0, n)), np.empty(0), A_le, b_le)
    if np.isinf(ref):
        assert sol.status == lpm.INFEASIBLE
    else:
        assert sol.optimal
        assert sol.objective == pytest.approx(ref, rel=1e-6, abs=1e-9)
        assert not p.violations(sol.x)


def test_export_one_variable(tmp_path):
    p = LinearProgram()
    x = p.add_column("x", 0, INF, 1.0)
    r = p.add_row("atleast", GE, 3.0)
    p.set_coeff(r, x, 1.0)
    text = export_lp(p, tmp_path / "one.lp").read_text()
    obj = text.split("Subject To")[0]
    assert obj.count(" x") == 1
    assert text.count(">=") == 1


def test_export_empty_is_an_error(tmp_path):
    with pytest.raises(LpError):
        export_lp(LinearProgram(), tmp_path / "empty.lp")


def mixed_program():
    p = LinearProgram("mixed")
    a = p.add_column("a", 0, 5, 2.0)
    b = p.add_column("b", -INF, INF, 0.5)
    c = p.add_column("energy(1)", 1, 1, -1.0)  # needs renaming in LP format
    r = p.add_rows(["le", "ge", "eq", "empty"], [LE, GE, EQ, LE], [4.0, -2.0, 1.5, 0.0])
    p.add_coeffs([r[0], r[0], r[1], r[2], r[2]], [a, b, b, a, c], [1.0, 1.0, 1.0, 1.0, 1e-3])
    return p.finalize()


def test_export_read_round_trip(tmp_path):
    p = mixed_program()
    q = read_lp(export_lp(p, tmp_path / "m.lp"))
    assert (q.n_cols, q.n_rows, q.nnz) == (p.n_cols, p.n_rows, p.nnz)
    assert np.array_equal(q.c, p.c)
    assert np.array_equal(q.lb, p.lb) and np.array_equal(q.ub, p.ub)
    assert np.array_equal(q.rhs, p.rhs)
    assert (q.A != p.A).nnz == 0
    assert solve(q).objective == pytest.approx(solve(p).objective, rel=1e-12)


def test_third_party_reader_agrees(tmp_path):
    highspy = pytest.importorskip("highspy")
    p = mixed_program()
    path = export_lp(p, tmp_path / "m.lp")
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    assert h.readModel(str(path)) == highspy.HighsStatus.kOk
    h.run()
    assert h.getModelStatus() == highspy.HighsModelStatus.kOptimal
    assert h.getInfo().objective_function_value == pytest.approx(solve(p).objective, rel=1e-9)
    assert h.getNumCol() == p.n_cols
    assert h.getNumRow() == p.n_rows


def test_reader_rejects_integer_sections(tmp_path):
    path = tmp_path / "int.lp"
    path.write_text("Minimize\n obj: x\nSubject To\n c: x >= 1\nGeneral\n x\nEnd\n")
    with pytest.raises(LpError):
        read_lp(path)

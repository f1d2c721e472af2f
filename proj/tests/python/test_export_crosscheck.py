"""Independent-solver cross-check of the exported standard form.

Parses the line-oriented sparse format (docs/sdp_standard_form.md), rebuilds
the program in cvxpy and compares the optimal value against the in-process
solver at 1e-5 relative.
"""

import json
import os
import subprocess

import numpy as np
import pytest

import drregret

cp = pytest.importorskip("cvxpy")


def parse_standard_form(text):
    tokens = text.split()
    pos = 0

    def take():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    assert take() == "sdpsf" and take() == "1"
    assert take() == "vars"
    m = int(take())
    for _ in range(m):
        assert take() == "var"
        take(), take()
    assert take() == "objconst"
    c0 = float(take())
    assert take() == "obj"
    c = np.zeros(m)
    for _ in range(int(take())):
        c[int(take())] += float(take())
    assert take() == "blocks"
    nblocks = int(take())
    blocks = []
    tok = take()
    for _ in range(nblocks):
        assert tok == "block"
        take()  # index
        dim = int(take())
        F0 = np.zeros((dim, dim))
        coeffs = {}
        tok = take()
        while tok in ("f0", "f"):
            if tok == "f0":
                for _ in range(int(take())):
                    r, cidx, v = int(take()), int(take()), float(take())
                    F0[r, cidx] = v
                    F0[cidx, r] = v
            else:
                slot = int(take())
                mat = coeffs.setdefault(slot, np.zeros((dim, dim)))
                for _ in range(int(take())):
                    r, cidx, v = int(take()), int(take()), float(take())
                    mat[r, cidx] += v
                    if r != cidx:
                        mat[cidx, r] += v
            tok = take()
        blocks.append((dim, F0, coeffs))
    assert tok == "eq"
    eqs = []
    for _ in range(int(take())):
        assert take() == "eqrow"
        n, rhs = int(take()), float(take())
        row = [(int(take()), float(take())) for _ in range(n)]
        eqs.append((row, rhs))
    assert take() == "end"
    return m, c0, c, blocks, eqs


def solve_with_cvxpy(text):
    m, c0, c, blocks, eqs = parse_standard_form(text)
    x = cp.Variable(m)
    constraints = []
    for dim, F0, coeffs in blocks:
        expr = cp.Constant(F0)
        for slot, mat in coeffs.items():
            expr = expr + x[slot] * mat
        constraints.append(expr >> 0)
    for row, rhs in eqs:
        constraints.append(sum(coef * x[slot] for slot, coef in row) == rhs)
    prob = cp.Problem(cp.Minimize(c0 + c @ x), constraints)
    try:
        prob.solve(solver=cp.CLARABEL)
    except cp.error.SolverError:
        prob.solve(solver=cp.SCS, eps=1e-9, max_iters=200000)
    assert prob.status in ("optimal", "optimal_inaccurate")
    return prob.value


def boeing():
    ss = drregret.boeing747()
    return ss["A"], ss["B"], ss["C"], ss["Q"], ss["R"]


def test_dr_program_crosscheck():
    A, B, C, Q, R = boeing()
    # a mid-bracket gamma at the experiment's scale
    text = drregret.export_dr_sdp(A, B, C, Q, R, 10, 10.0, 4.0)
    reference = solve_with_cvxpy(text)

    # in-process: inner solve at the same gamma through the same export path
    import _drregret  # noqa: F401  (already imported as drregret)

    # reparse through the CLI-facing python entry: synthesize is the outer
    # search; here we compare the fixed-gamma program value instead.
    value = drregret.run_fixed_gamma(A, B, C, Q, R, 10, 10.0, 4.0)
    assert value == pytest.approx(reference, rel=1e-5)


def test_small_dr_program_crosscheck():
    A = np.array([[0.7]])
    B = np.array([[1.0]])
    C = np.array([[1.0]])
    Q = R = np.eye(1)
    text = drregret.export_dr_sdp(A, B, C, Q, R, 3, 2.5, 1.0)
    reference = solve_with_cvxpy(text)
    value = drregret.run_fixed_gamma(A, B, C, Q, R, 3, 2.5, 1.0)
    assert value == pytest.approx(reference, rel=1e-6)


def test_cli_export_roundtrip(tmp_path):
    cli = os.environ.get("DRREGRET_CLI")
    if not cli or not os.path.exists(cli):
        pytest.skip("CLI binary not available")
    config = {
        "system": "boeing747",
        "horizon": 10,
        "radii": [4.0],
        "controllers": ["DR-RO-MF"],
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config))
    out_path = tmp_path / "prob.sdpsf"
    subprocess.run(
        [cli, "export-sdp", "--config", str(cfg_path), "--gamma", "10.0", "--radius", "4.0",
         "--out", str(out_path)],
        check=True,
        capture_output=True,
    )
    text = out_path.read_text()
    m, c0, c, blocks, eqs = parse_standard_form(text)
    dims = sorted(dim for dim, _, _ in blocks)
    assert dims == [40, 60, 140]
    assert m == 60 * 61 // 2 + 55 * 4
    reference = solve_with_cvxpy(text)
    A, B, C_, Q, R = boeing()
    value = drregret.run_fixed_gamma(A, B, C_, Q, R, 10, 10.0, 4.0)
    assert value == pytest.approx(reference, rel=1e-5)

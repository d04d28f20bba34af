"""Smoke test for the fracdiff_py extension.

Build and install the wheel first (from crates/py):

    maturin build --release -o dist && pip install dist/fracdiff_py-*.whl

then run ``python python/smoke_test.py``.
"""

import math

import numpy as np

import fracdiff_py as fd


def check_quadrature():
    nodes, weights = fd.quadrature(4, weight=lambda a: 1.0)
    assert len(nodes) == 9 and nodes[0] == 0.0 and nodes[-1] == 1.0
    assert math.isclose(sum(weights), 1.0, rel_tol=1e-14)

    s = fd.sigma(10, 1.5 / 64)
    assert 0.5 <= s <= 1.0

    chat = fd.temporal_coefficients(10, 1.5 / 64, 40)
    assert len(chat) == 40
    assert all(a > b for a, b in zip(chat, chat[1:]))


def check_stencil():
    assert fd.riesz_stencil(2.0, 3) == [2.0, -1.0, 0.0, 0.0]
    g = fd.riesz_stencil(1.5, 50)
    assert g[0] > 0 and all(v <= 0 for v in g[1:])


def check_operators():
    rng = np.random.default_rng(7)
    col = rng.uniform(-1, 1, 37)
    t = fd.Toeplitz(col.tolist())
    dense = np.array([[col[abs(i - j)] for j in range(37)] for i in range(37)])
    v = rng.uniform(-1, 1, 37)
    assert np.allclose(t.matvec(v.tolist()), dense @ v, rtol=0, atol=1e-12)
    assert np.allclose(np.array(t.to_dense()), dense)

    g = fd.Toeplitz.riesz(1.8, 63)
    c = fd.Circulant.approximate("rchan", g).shifted(5.0, 20.0)
    b = rng.uniform(-1, 1, 63).tolist()
    assert np.allclose(c.matvec(c.solve(b)), b, atol=1e-12)

    op = fd.StepOperator(5.0, 20.0, g)
    pcg = op.solve(b, precond="rchan", tol=1e-12)
    plain = op.solve(b, precond="none", tol=1e-12)
    assert pcg.converged and plain.converged
    assert pcg.iterations < plain.iterations
    assert np.allclose(pcg.solution, plain.solution, atol=1e-9)

    eig = op.spectrum(precond="rchan")
    assert min(eig) > 0


def check_examples():
    one = fd.solve("example1", beta=1.2, M=32, N=1000, J=50)
    assert abs(one["error"] - 3.423357e-05) / 3.423357e-05 < 5e-3, one["error"]
    assert len(one["final_field"]) == 33

    two = fd.solve("example2", beta=1.5, M=8, N=16, J=4, solver="cg", precond="none")
    assert len(two["final_field"]) == 81
    assert two["error"] is not None

    zero = fd.solve("zero1d", beta=1.5, M=16, N=8, J=2)
    assert zero["error"] == 0.0
    assert max(abs(u) for u in zero["final_field"]) == 0.0

    rows = fd.converge("example1", axis="time", levels=1, beta=1.5, M=200, N=8, J=20)
    assert rows[0][2] is None and 1.8 < rows[1][2] < 2.1

    original, preconditioned = fd.spectrum("example1", beta=1.8, M=64, N=64, J=10)
    inside = sum(0.5 <= v <= 1.5 for v in preconditioned) / len(preconditioned)
    assert len(original) == 63 and inside > 0.9


def check_errors():
    for bad in (lambda: fd.riesz_stencil(2.5, 4),
                lambda: fd.solve("nosuch"),
                lambda: fd.Toeplitz([]),
                lambda: fd.Circulant.approximate("lu", fd.Toeplitz([1.0]))):
        try:
            bad()
        except ValueError:
            continue
        raise AssertionError("expected ValueError")
    try:
        fd.Circulant([0.0, 0.0]).solve([1.0, 1.0])
    except RuntimeError:
        pass
    else:
        raise AssertionError("expected RuntimeError")


if __name__ == "__main__":
    for check in (check_quadrature, check_stencil, check_operators, check_examples, check_errors):
        check()
        print(f"ok  {check.__name__}")
    print("smoke test passed")

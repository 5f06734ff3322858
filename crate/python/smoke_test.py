"""Smoke test of the Python bindings. Build and install first:

    maturin build --release -m crates/python/Cargo.toml
    pip install target/wheels/pydilatlab-*.whl
"""

import math

import pydilatlab as dl


def close(a, b, tol=1e-12):
    return all(abs(x - y) <= tol for x, y in zip(a, b))


def main():
    e2 = dl.Structure("euclidean:2")
    assert e2.dim == 2 and e2.has_exact
    assert close(e2.dilate([0.0, 0.0], 0.5, [1.0, 2.0]), [0.5, 1.0])
    # Σ_ε(u, v) = u + v - ε u about the origin
    assert close(e2.sum([0.0, 0.0], 0.25, [1.0, 0.0], [0.0, 1.0]), [0.75, 1.0])
    assert e2.lin_defect([0.0, 0.0], [0.3, 0.1], [-0.2, 0.4], 0.5, 0.25) == 0.0

    h = dl.Structure("conical:heisenberg")
    assert h.name == "conical:heisenberg:koranyi"
    u, v = [0.2, 0.1, 0.0], [0.1, 0.3, 0.05]
    back = h.diff(h.center, 0.5, u, h.sum(h.center, 0.5, u, v))
    assert close(back, v, 1e-12), back
    value, _ = h.tangent_distance(h.center, u, v)
    assert value > 0.0

    report = h.sweep("a3", samples=20)
    assert report["verdict"] == "pass" and max(report["defects"]) == 0.0
    ident = h.identities(samples=50)
    assert ident["pass"], ident

    chart = dl.Structure("chart:2")
    assert chart.lin_defect([0.0, 0.0], [0.4, -0.2], [-0.3, 0.35], 0.5, 0.5) > 1e-6

    g = dl.Group("heisenberg:1")
    assert close(g.mul([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]), [1.0, 1.0, 0.5])
    assert close(g.dilation([1.0, 1.0, 1.0], 0.5), [0.5, 0.5, 0.25])
    lower, upper = g.cc_bounds([0.0] * 3, [1.0, 0.0, 0.0])
    assert lower == 1.0 and upper <= 1.0 + 1e-4
    lower, upper = g.cc_bounds([0.0] * 3, [0.0, 0.0, 1.0])
    assert lower == 0.0 and upper <= 4.0
    assert len(g.decompose([0.0, 0.0, 1.0])) == 4

    for bad, exc in [(lambda: dl.Structure("nosuch"), ValueError),
                     (lambda: dl.Group("engel").decompose([0.0, 0.0, 0.0, 1.0]), NotImplementedError),
                     (lambda: e2.distance([0.0], [1.0, 2.0]), ValueError)]:
        try:
            bad()
        except exc:
            pass
        else:
            raise AssertionError(f"expected {exc.__name__}")

    print("python smoke test ok; cc upper bound of (0,0,1):", round(upper, 4), "vs circle", round(2 * math.sqrt(math.pi), 4))


if __name__ == "__main__":
    main()

"""Smoke test for the pycohlim extension module."""

import cmath

import pycohlim as pc


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    v, w = pc.convert("tau", (0.5, 0.0), "canonical", k=1.0)
    assert close(v, 0.8) and close(w, 5.0 / 3.0), (v, w)

    assert close(pc.metric("tau", (0.0, 0.0), 1.0), 2.0)

    tau, tau2 = 0.3 + 0.2j, -0.4 + 0.1j
    ov = pc.overlap(tau, tau2, 2.0)
    term, series = 1.0 + 0j, 1.0 + 0j
    for n in range(200):
        term *= (4.0 + n) / (n + 1) * tau.conjugate() * tau2
        series += term
    series *= ((1 - abs(tau) ** 2) * (1 - abs(tau2) ** 2)) ** 2.0
    assert cmath.isclose(ov, series, rel_tol=1e-10), (ov, series)

    rep = pc.RepParams(2, 1.0, 80)
    assert rep.j == 2.0 and rep.cutoff == 80
    assert len(rep.coherent_state(0.4j)) == rep.dim == 81
    for g in ("K0", "K1", "K2"):
        assert close(rep.symbol(g, 0.5).real, pc.diagonal_symbol(g, 0.5, 1.0))
    assert close(pc.symbol("B", 0.5).real, 8.0 / 3.0)

    assert pc.identity_resolution(3.0) < 1e-8
    try:
        pc.identity_resolution(0.4)
    except ValueError:
        pass
    else:
        raise AssertionError("J = 0.4 accepted")

    f = pc.factorization_defect("K0", "K0", 0.5, 1.0, [2, 4, 8, 16, 32, 64])
    assert f["pass"] and abs(f["slope"] + 1.0) < 0.05, f

    h = pc.Hamiltonian("C")
    assert sorted(h.classical(1.0)) == [((0, -1), 1.0), ((2, 1), 1.0)]
    quantum, classical = h.evolve(0.0, 1.0, 8, 2.0, 4)
    for t, a in zip(quantum["t"], quantum["A"]):
        assert close(a, 1.0 + t * t, 1e-8)
    assert close(pc.free_particle(0.0, 1.0, 1.0, 2.0)[1], 5.0)

    cas = pc.casimir_check(2, 12)
    assert cas["pass"] and cas["residual"] < 1e-10

    print("pycohlim smoke test passed")


if __name__ == "__main__":
    main()

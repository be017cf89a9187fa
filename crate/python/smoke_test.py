"""Smoke test for the stoint_py extension module.

Build and install first:
    pip install --no-build-isolation -e crates/py
"""

import math

import stoint_py as st


def s1(delta=1.0):
    return st.SlaterOrbital(1, 0, 0, delta)


def coulomb_closed(zeta, r):
    rho = zeta * r
    return zeta * (1 / rho - math.exp(-2 * rho) * (1 / rho + 11 / 8 + 0.75 * rho + rho * rho / 6))


def main():
    req = st.IntegralRequest("coulomb", [s1()] * 4, 1.4)
    res = st.evaluate(req)
    assert abs(res.value - coulomb_closed(1.0, 1.4)) < 1e-12, res
    assert res.mu_used > 0 and not res.zero_by_selection
    print("coulomb 1s R=1.4:", res)

    p = st.SlaterOrbital(2, 1, 1, 1.0)
    zero = st.evaluate(st.IntegralRequest("exchange", [p, s1(), s1(), s1()], 2.0))
    assert zero.zero_by_selection and zero.value == 0.0

    reqs = [st.IntegralRequest("coulomb", [s1(z)] * 4, r) for z in (0.8, 1.5) for r in (0.5, 3.0)]
    one = st.evaluate_batch(reqs, workers=1)
    many = st.evaluate_batch(reqs, workers=4)
    assert [r.value for r in one] == [r.value for r in many]
    for q, r in zip(reqs, one):
        z = q.orbitals[0].delta
        assert abs(r.value - coulomb_closed(z, q.distance)) < 1e-10 * r.value

    assert st.b_series(2, 1, -1.0) == -st.b_series(2, 1, 1.0)
    assert st.a_closed(1, 0, 0, 2.0, 3.0) > 0

    for bad in (lambda: st.SlaterOrbital(1, 1, 0, 1.0), lambda: st.IntegralRequest("coulomb", [s1()] * 4, -1.0)):
        try:
            bad()
        except ValueError as e:
            print("rejected:", e)
        else:
            raise AssertionError("invalid input accepted")
    try:
        st.evaluate(req, mu_cap=2)
    except st.ConvergenceError as e:
        print("convergence error:", e)
    else:
        raise AssertionError("mu cap ignored")

    print("smoke test passed")


if __name__ == "__main__":
    main()

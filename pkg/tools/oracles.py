"""Reference values frozen into the test-suite.

Computed with sympy/mpmath at 40 significant digits, independently of the
package.  Run ``python3 tools/oracles.py`` to regenerate; the printed
numbers are pasted into ``tests/`` as literals.  Needs sympy and mpmath,
which are development tools only.
"""

import mpmath as mp
import sympy as sp

mp.mp.dps = 40


def softplus_chain(x):
    x = mp.mpf(x)
    s, c = 1 / (1 + mp.e ** (-x)), 1 / (1 + mp.e**x)
    return mp.log1p(mp.e**x), s, s * c, s * c * (c - s)


def dual(v):
    v = mp.mpf(v)
    return v * mp.log(v) + (1 - v) * mp.log(1 - v)


def kappa_symbolic(H_of_V, n, point):
    """-Laplace-Beltrami of H(V(U)) for Psi = sum softplus, in closed sympy form."""
    U = sp.symbols(f"u1:{n + 1}")
    V = [1 / (1 + sp.exp(-u)) for u in U]
    H = H_of_V(V)
    g = [sp.diff(sp.log(1 + sp.exp(u)), u, 2) for u in U]
    sqrtg = sp.sqrt(sp.Mul(*g))
    lap = sum(sp.diff(sqrtg / g[a] * sp.diff(H, U[a]), U[a]) for a in range(n)) / sqrtg
    return sp.N(-lap.subs(dict(zip(U, point))), 30)


def hopfield_H(J, R, I):
    def H(V):
        n = len(V)
        quad = -sp.Rational(1, 2) * sum(J[a][b] * V[a] * V[b] for a in range(n) for b in range(n))
        leak = sum((V[a] * sp.log(V[a]) + (1 - V[a]) * sp.log(1 - V[a])) / R[a] for a in range(n))
        return quad + leak - sum(I[a] * V[a] for a in range(n))

    return H


def gradient_volume_log_ratio(U0, T):
    """Each coordinate solves dU/dt = -sigma(U): U - exp(-U) = U0 - exp(-U0) - t."""
    total = mp.mpf(0)
    for u0 in U0:
        c = mp.mpf(u0) - mp.e ** (-mp.mpf(u0)) - T
        uT = mp.findroot(lambda u: u - mp.e ** (-u) - c, u0 - T)
        s0, sT = 1 / (1 + mp.e ** (-mp.mpf(u0))), 1 / (1 + mp.e ** (-uT))
        total += mp.log(sT / s0) + mp.log((sT * (1 - sT)) / (s0 * (1 - s0))) / 2
    return total


def hopfield_steady(J, R, I):
    n = len(R)

    def F(*u):
        v = [1 / (1 + mp.e ** (-x)) for x in u]
        return [sum(J[a][b] * v[b] for b in range(n)) - u[a] / R[a] + I[a] for a in range(n)]

    return mp.findroot(F, [mp.mpf(0)] * n)


def cohen_grossberg_H(U, R, I, J, a2):
    """H' for A = 1 + a2 U^2, B = -U/R + I, C = -J, psi = softplus."""
    n = len(U)
    sig = lambda x: 1 / (1 + mp.e ** (-x))  # noqa: E731
    total = mp.mpf(0)
    for k in range(n):
        total -= mp.quad(lambda s: (-s / R[k] + I[k]) * sig(s) * (1 - sig(s)), [0, U[k]])
    V = [sig(mp.mpf(u)) for u in U]
    total += mp.mpf(1) / 2 * sum(-J[k][m] * V[k] * V[m] for k in range(n) for m in range(n))
    return total


if __name__ == "__main__":
    for x in (-3, 0, mp.log(2), 2.5, 40, 700):
        print("softplus_chain", mp.nstr(x, 17), [mp.nstr(v, 20) for v in softplus_chain(x)])
    for v in (0.1, 0.5, mp.mpf(2) / 3, 0.9):
        print("dual", mp.nstr(v, 17), mp.nstr(dual(v), 20))

    J = [[sp.Rational(1, 2), sp.Rational(-3, 10)], [sp.Rational(-3, 10), sp.Rational(1, 5)]]
    print("kappa hopfield n=2", kappa_symbolic(hopfield_H(J, [1, 2], [sp.Rational(1, 10), sp.Rational(-1, 5)]), 2, [sp.Rational(3, 10), sp.Rational(-7, 10)]))
    print("kappa gradient n=2 at (1,-1)", kappa_symbolic(lambda V: sum(v**2 for v in V) / 2, 2, [1, -1]))
    print("kappa gradient n=3 at (0.5,2,-1.5)", kappa_symbolic(lambda V: sum(v**2 for v in V) / 2, 3, [sp.Rational(1, 2), 2, sp.Rational(-3, 2)]))
    print("volume log ratio n=2 U0=(1,-1) T=5", mp.nstr(gradient_volume_log_ratio([1, -1], 5), 20))

    Js = [[0, 0.3, -0.3], [0.3, 0, 0.3], [-0.3, 0.3, 0]]
    print("steady n=3", [mp.nstr(x, 20) for x in hopfield_steady(Js, [1, 2, 4], [0.1, -0.2, 0])])
    print("steady n=2", [mp.nstr(x, 20) for x in hopfield_steady([[0, 0.3], [0.3, 0]], [1, 2], [0, 0])])
    print("H' cohen-grossberg", mp.nstr(cohen_grossberg_H([0.7, -1.2], [1, 2], [0.1, -0.3], [[0, 0.4], [0.4, 0]], 0.1), 20))

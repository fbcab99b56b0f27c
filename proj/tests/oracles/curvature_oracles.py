"""Symbolic oracles for the curvature and asymptotics tests.

Scalar curvature is computed from the textbook definition
R = g^{ij}(d_m G^m_ij - d_j G^m_im + G^m_ij G^k_km - G^m_ik G^k_jm).
"""
import mpmath as mp
import sympy as sp

x = sp.symbols("x0:3", real=True)
r = sp.sqrt(sum(c**2 for c in x))


def christoffel(g):
    ginv = g.inv()
    G = [[[0] * 3 for _ in range(3)] for _ in range(3)]
    for k in range(3):
        for i in range(3):
            for j in range(3):
                G[k][i][j] = sp.Rational(1, 2) * sum(
                    ginv[k, l] * (sp.diff(g[j, l], x[i]) + sp.diff(g[i, l], x[j]) - sp.diff(g[i, j], x[l]))
                    for l in range(3))
    return G


def scalar(g):
    ginv = g.inv()
    G = christoffel(g)
    R = 0
    for i in range(3):
        for j in range(3):
            t = 0
            for m in range(3):
                t += sp.diff(G[m][i][j], x[m]) - sp.diff(G[m][i][m], x[j])
                for k in range(3):
                    t += G[m][i][j] * G[k][k][m] - G[m][i][k] * G[k][j][m]
            R += ginv[i, j] * t
    return R


def at(expr, p):
    return sp.N(expr.subs(dict(zip(x, p))), 20)


# Schwarzschild isotropic, m = 1, outside the cap.
u = 1 + 1 / (2 * r)
gs = sp.eye(3) * u**4
P = (sp.Rational(7, 10), sp.Rational(-2, 5), sp.Rational(9, 10))
Gs = christoffel(gs)
print("schwarzschild Gamma^k_ij at (0.7, -0.4, 0.9):")
for k in range(3):
    for i in range(3):
        for j in range(i, 3):
            print(f"  {k}{i}{j} {at(Gs[k][i][j], P)}")
print("schwarzschild R at P:", at(sp.simplify(scalar(gs)), P))

# (1 + |x|^2)^{-2} delta: a quarter of the round unit-sphere metric, R = 24.
gr = sp.eye(3) * (1 + r**2) ** -2
print("round-sphere analogue R:", sp.simplify(scalar(gr)))

# ADM integrand sum_ij (d_i g_ij - d_j g_ii) nu_j at (8, 0, 0).
Q = (8, 0, 0)
integrand = sum(
    (sum(sp.diff(gs[i, j], x[i]) for i in range(3)) - sum(sp.diff(gs[i, i], x[j]) for i in range(3))) * x[j] / r
    for j in range(3))
print("schwarzschild ADM integrand at (8,0,0):", at(integrand, Q))
a = sp.Rational(1, 2)
gt = sp.eye(3) * (1 + a / r)
integrand_t = sum(
    (sum(sp.diff(gt[i, j], x[i]) for i in range(3)) - sum(sp.diff(gt[i, i], x[j]) for i in range(3))) * x[j] / r
    for j in range(3))
print("trace metric (1 + a/r), a = 1/2, integrand:", sp.simplify(integrand_t.subs({x[1]: 0, x[2]: 0})))

# Negative-R bump: g = w^4 delta, w = 1 + 0.1 exp(-|x|^2 / 0.05).
rr = sp.symbols("rr", positive=True)
w = 1 + sp.Rational(1, 10) * sp.exp(-rr**2 / sp.Rational(1, 20))
lap = sp.diff(w, rr, 2) + 2 / rr * sp.diff(w, rr)
Rb = sp.simplify(-8 * w**-5 * lap)
Rf = sp.lambdify(rr, Rb, "mpmath")
mp.mp.dps = 30
zero = mp.sqrt(mp.mpf(3) / 40)  # Laplacian of the Gaussian changes sign at r^2 = 1.5 * 0.05
val = 4 * mp.pi * mp.quad(lambda t: t**2 * max(-Rf(t), 0) ** mp.mpf(1.5), [zero, 0.6, 1.0, 2.0])
print("bump R zero at r =", zero)
print("bump ||R_-||_{L^{3/2}} (flat measure, all of R^3):", mp.nstr(val ** (mp.mpf(2) / 3), 20))

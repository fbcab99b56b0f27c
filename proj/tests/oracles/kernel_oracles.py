"""Reference integrals for the bump kernel exp(-1/(1-|x|^2)).

Prints the unnormalized ball integrals I_n (n = 1..4) and, for n = 1, the
absolute first moment of the normalized kernel, int |u| rho(u) du.
"""
import mpmath as mp

mp.mp.dps = 30


def bump(r):
    return mp.e ** (-1 / (1 - r * r)) if r < 1 else mp.mpf(0)


def sphere_area(n):
    return 2 * mp.pi ** (mp.mpf(n) / 2) / mp.gamma(mp.mpf(n) / 2)


for n in range(1, 5):
    radial = mp.quad(lambda r: bump(r) * r ** (n - 1), [0, 0.5, 0.9, 1])
    print(f"I_{n} = {mp.nstr(sphere_area(n) * radial, 20)}")

I1 = 2 * mp.quad(bump, [0, 0.5, 0.9, 1])
moment = 2 * mp.quad(lambda u: u * bump(u), [0, 0.5, 0.9, 1]) / I1
print(f"abs_moment_1d = {mp.nstr(moment, 20)}")

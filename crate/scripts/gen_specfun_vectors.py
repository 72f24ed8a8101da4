#!/usr/bin/env python3
"""Regenerate crates/core/tests/data/specfun_vectors.txt with mpmath.

Each line is `function, inputs..., expected, tolerance` where tolerance is
the allowed relative error.
"""
import mpmath as mp

mp.mp.dps = 50
REL = "1e-10"
rows = []


def add(name, args, value):
    rows.append(", ".join([name] + [repr(float(a)) for a in args] + [mp.nstr(value, 20), REL]))


for x in [0.0, 0.25, 1.0, 3.0, mp.pi, 4.5, 7.0, 10.0, 13.3, 20.0, 31.0, -2.0, -9.5]:
    v = mp.besselj(0, x)
    if abs(v) > 1e-3 or x == 0:
        add("bessel_j0", [x], v)
for x in [0.0, 0.1, 1.0, 2.5, 4.0, 6.2, 9.0, 12.5, 25.0, -1.7]:
    v = mp.besselj(1, x)
    if x == 0:
        continue
    if abs(v) > 1e-3:
        add("bessel_j1", [x], v)
for x in [0.0, 1e-6, 0.3, 1.0, 5.0, 15.0, 19.99, 20.0, 20.01, 35.0, 80.0, 250.0, 600.0]:
    add("bessel_i0_scaled", [x], mp.exp(-x) * mp.besseli(0, x))

for a in [0.1, 0.5, 1.0, 2.5, 5.0, 10.0, 20.0, 35.0, 50.0]:
    for x in [0.0, 0.01, 0.1, 1.0, 5.0, 10.0, 25.0, 50.0, 100.0, 200.0]:
        p = mp.gammainc(a, 0, x, regularized=True)
        q = mp.gammainc(a, x, mp.inf, regularized=True)
        if p > 1e-300:
            add("reg_lower_gamma", [a, x], p)
        if q > 1e-300:
            add("reg_upper_gamma", [a, x], q)


def marcum(a, b):
    a = mp.mpf(a)
    b = mp.mpf(b)
    f = lambda r: r * mp.exp(-(r * r + a * a) / 2) * mp.besseli(0, a * r)
    # dense breakpoints keep tanh-sinh accurate where the density varies by
    # many orders of magnitude within one unit of r
    hi = max(b, a) + 12
    q = mp.quad(f, [b + i * (hi - b) / 200 for i in range(201)] + [mp.inf])
    p = mp.quad(f, [i * b / 200 for i in range(201)])
    return q, p


for a in [0.1, 0.5, 1.0, 2.0, 4.9, 5.1, 8.0, 15.0, 30.0, 50.0]:
    for b in [0.05, 0.5, 1.0, 2.0, 5.0, 0.8 * a, a, 1.2 * a, a + 3.0, a + 8.0]:
        q, p = marcum(a, b)
        if q > 1e-280:
            add("marcum_q1", [a, b], q)
        if p > 1e-280:
            add("marcum_p1", [a, b], p)


def series_condition(a, b1, b2, z):
    t = mp.mpf(1)
    s = mp.mpf(1)
    mx = mp.mpf(1)
    k = 0
    while True:
        t *= (a + k) / ((b1 + k) * (b2 + k) * (k + 1)) * z
        k += 1
        s += t
        mx = max(mx, abs(t))
        if abs(t) < mp.mpf(10) ** -30 * abs(s) and k > 10:
            break
    return s, mx * k * 2.0 ** -52 / abs(s)


for a, b1, b2 in [(0.5, 1.0, 1.5), (1.0, 2.0, 2.5), (-0.5, 0.5, 3.0), (2.5, 1.5, 0.5), (1.5, 2.0, 4.0)]:
    for z in [-40.0, -25.0, -10.0, -mp.pi ** 2 / 4, -1.0, -0.1, 0.5, 3.0, 10.0, 40.0]:
        v = mp.hyper([a], [b1, b2], z)
        _, cond = series_condition(a, b1, b2, z)
        if cond < 1e-11:
            add("hyp1f2", [a, b1, b2, z], v)

with open("crates/core/tests/data/specfun_vectors.txt", "w") as fh:
    fh.write("# function, inputs..., expected, relative tolerance\n")
    fh.write("# generated by scripts/gen_specfun_vectors.py (mpmath, 50 digits)\n")
    fh.write("\n".join(rows) + "\n")
print(len(rows), "rows")

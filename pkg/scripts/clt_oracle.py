"""Independent high-precision values for the Wigner CLT mean and covariance.

Uses mpmath only (closed-form semicircle transform, mpmath.diff for every
derivative), so nothing here shares code with ``rmtlaws.laws``. The printed
values are frozen into tests/test_laws.py and tests/test_acceptance.py.

    python scripts/clt_oracle.py
"""

import mpmath as mp

mp.mp.dps = 30


def s(z):
    z = mp.mpc(z)
    r = mp.sqrt(z * z - 4)
    for cand in ((-z + r) / 2, (-z - r) / 2):
        if mp.im(cand) > 0:
            return cand
    raise ValueError(z)


def sp(z):
    return mp.diff(s, z)


def a(z, sigma2, kappa, beta):
    return (1 + sp(z)) * s(z) ** 3 * (sigma2 - 1 + (kappa - 1) * sp(z) + beta * s(z) ** 2)


def b(z1, z2, sigma2, kappa, beta):
    s1, s2 = s(z1), s(z2)
    return sp(z1) * sp(z2) * (sigma2 - kappa + 2 * beta * s1 * s2 + kappa / (1 - s1 * s2) ** 2)


def main():
    cases = {"gauss-real": (1, 2, 0), "gauss-complex": (1, 1, 0), "rademacher": (1, 2, -2)}
    zs = [mp.mpc(0, 2), mp.mpc(0, 1.5), mp.mpc(1, 1), mp.mpc(-2.5, 0.7)]
    print(f"s(2i) = {mp.nstr(s(zs[0]), 17)}   s'(2i) = {mp.nstr(sp(zs[0]), 17)}")
    for name, (sigma2, kappa, beta) in cases.items():
        print(f"== {name}: sigma2={sigma2} kappa={kappa} beta={beta}")
        for z in zs:
            av = a(z, sigma2, kappa, beta)
            ap = mp.diff(lambda u: a(u, sigma2, kappa, beta), z)
            print(f"z={mp.nstr(z, 6)}  a={mp.nstr(av, 17)}  a'={mp.nstr(ap, 17)}")
        for i, z1 in enumerate(zs):
            for z2 in zs[i:]:
                bv = b(z1, z2, sigma2, kappa, beta)
                d2 = mp.diff(lambda u, v: b(u, v, sigma2, kappa, beta), (z1, z2), (1, 1))
                print(f"z1={mp.nstr(z1, 6)} z2={mp.nstr(z2, 6)}  b={mp.nstr(bv, 17)}  d2b={mp.nstr(d2, 17)}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Armijo-rule factor vs the two classical bounds, across conditioning.

Writes figure-ready CSV (armijo_eps025.csv, armijo_eps05.csv) sweeping
the condition number kappa:

  eps = 1/4: t_new = 1 - 4 eps (1-eps) / (eta kappa) against
             t_ly = 1 - 2 eps / (eta kappa); t_new is strictly smaller.
  eps = 1/2: t_new against the t_nemi ratio bound; as eta -> 1+ and
             kappa -> 1+, t_new vanishes while t_nemi levels at 1/2.
"""

from fractions import Fraction as F

from ratecert import compare_armijo


def sweep(eps, eta, kappas):
    rows = []
    for kappa in kappas:
        comp = compare_armijo(eps, eta, kappa)
        rows.append((kappa, comp))
    return rows


def main():
    kappas = [1 + F(k, 4) for k in range(1, 200, 4)]

    rows = sweep(F(1, 4), F(3, 2), kappas)
    with open("armijo_eps025.csv", "w") as fh:
        fh.write("kappa,t_new,t_ly\n")
        for kappa, comp in rows:
            fh.write(f"{float(kappa)!r},{float(comp.t_new)!r},{float(comp.t_ly)!r}\n")
    assert all(comp.new_beats_ly for _, comp in rows)
    print(f"eps = 1/4, eta = 3/2: t_new < t_ly on all {len(rows)} grid points -> armijo_eps025.csv")

    rows = sweep(F(1, 2), F(3, 2), kappas)
    with open("armijo_eps05.csv", "w") as fh:
        fh.write("kappa,t_new,t_nemi\n")
        for kappa, comp in rows:
            fh.write(f"{float(kappa)!r},{float(comp.t_new)!r},{float(comp.t_nemi)!r}\n")
    assert all(comp.new_beats_nemi for _, comp in rows)
    print(f"eps = 1/2, eta = 3/2: t_new <= t_nemi on all {len(rows)} grid points -> armijo_eps05.csv")

    print()
    print("limiting behaviour at eps = 1/2 as (eta, kappa) -> (1+, 1+):")
    for power in (2, 4, 6):
        tiny = F(1, 10**power)
        comp = compare_armijo(F(1, 2), 1 + tiny, 1 + tiny)
        print(f"  eta = kappa = 1 + 1e-{power}: t_new = {float(comp.t_new):.3e}, t_nemi = {float(comp.t_nemi):.6f}")
    print("t_new -> 0 (a single step solves the near-quadratic) while t_nemi -> 1/2")


if __name__ == "__main__":
    main()

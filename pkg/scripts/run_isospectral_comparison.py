#!/usr/bin/env python3
"""Dirichlet/Neumann spectra of H^(2,0), H^(1,1) and a scaled-anticommutator control on ball x torus.

Usage: python scripts/run_isospectral_comparison.py [--r-max 4] [--n-radial 12] [--w-max 2] [--count 15]
"""
import argparse
import time
from fractions import Fraction

from isospec.endo_core import heisenberg_ab, make_endo_space, quaternionic_heisenberg
from isospec.spectral_lab import Domain, Truncation, compare_spectra, spectrum


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--r-max", type=int, default=4)
    ap.add_argument("--n-radial", type=int, default=12)
    ap.add_argument("--w-max", type=float, default=2.0)
    ap.add_argument("--count", type=int, default=15)
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()

    h20 = quaternionic_heisenberg(2)
    gens = list(h20.generators)
    gens[0] = gens[0] * Fraction(3, 2)
    spaces = {
        "H(2,0)": h20,
        "H(1,1)": heisenberg_ab(1, 1),
        "control": make_endo_space(8, gens, anticommutator_index=0, provenance="scaled-A control"),
    }
    dom = Domain.torus(3, 1.0)
    trunc = Truncation(args.r_max, args.n_radial, args.w_max)
    for bc in ("dirichlet", "neumann"):
        t0 = time.perf_counter()
        reps = {k: spectrum(s, dom, bc, trunc, threads=args.threads) for k, s in spaces.items()}
        print(f"{bc} ({time.perf_counter() - t0:.1f} s, {len(reps['H(2,0)'].eigenvalues)} eigenvalues each)")
        print(f"  {'index':>5}  {'H(2,0)':>18}  {'H(1,1)':>18}  {'control':>18}")
        for i in range(args.count):
            row = [reps[k].eigenvalues[i] for k in spaces]
            print(f"  {i:>5}  " + "  ".join(f"{v:18.12f}" for v in row))
        pair = compare_spectra(reps["H(2,0)"], reps["H(1,1)"], args.count, 1e-8)
        ctrl = compare_spectra(reps["H(2,0)"], reps["control"], args.count, 1e-8)
        print(f"  pair:    {'PASS' if pair.ok else 'FAIL'}  max relative difference {pair.max_rel_diff:.3e}")
        print(f"  control: {'differs' if not ctrl.ok else 'agrees'}  max relative difference {ctrl.max_rel_diff:.3e}"
              + ("" if ctrl.ok else f", first at index {ctrl.first_mismatch}"))


if __name__ == "__main__":
    main()

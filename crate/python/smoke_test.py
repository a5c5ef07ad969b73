#!/usr/bin/env python3
"""Smoke test for the tesspec Python extension module.

Build the module first:

    cargo build -p tesspec-py --release --features extension-module

then run this script from anywhere inside the repository:

    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path


def find_module() -> Path:
    root = Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / "release" / "libtesspec.so",
        root / "target" / "debug" / "libtesspec.so",
    ]
    for c in candidates:
        if c.exists():
            return c
    sys.exit(
        "libtesspec.so not found; build it with\n"
        "  cargo build -p tesspec-py --release --features extension-module"
    )


def main() -> None:
    so = find_module()
    staging = Path(tempfile.mkdtemp(prefix="tesspec_py_"))
    shutil.copy2(so, staging / "tesspec.so")
    sys.path.insert(0, str(staging))

    import tesspec

    checks = 0

    def check(name: str, ok: bool, detail: str = "") -> None:
        nonlocal checks
        checks += 1
        status = "ok" if ok else "FAIL"
        print(f"  [{status}] {name}{(' — ' + detail) if detail else ''}")
        if not ok:
            sys.exit(1)

    print(f"tesspec {tesspec.__version__} from {so}")

    # unit conversions
    e = tesspec.photon_energy_ev(1062.9)
    check("photon_energy_ev(1062.9) ≈ 1.1665", abs(e - 1.1665) < 1e-3, f"{e:.5f} eV")
    back = tesspec.wavelength_nm(e)
    check("wavelength round trip", abs(back - 1062.9) < 1e-9, f"{back:.6f} nm")
    idler = tesspec.idler_from_signal_nm(532.0, 1040.0)
    check("idler_from_signal(532, 1040)", abs(idler - 1089.1338582677165) < 1e-9, f"{idler:.4f} nm")

    # special functions and material data
    a1 = tesspec.airy_zero(1)
    check("airy_zero(1)", abs(a1 - 2.338107410459767) < 1e-9, f"{a1:.9f}")
    n_o = tesspec.refractive_index("ordinary", 1064.0, 25.0)
    n_e = tesspec.refractive_index("extraordinary", 1064.0, 25.0)
    check("n_o(1064 nm, 25 °C) ≈ 2.2296", abs(n_o - 2.229627404) < 1e-6, f"{n_o:.6f}")
    check("negative uniaxial (n_o > n_e)", n_o > n_e, f"n_e = {n_e:.6f}")

    # small end-to-end pipeline: calibrate on a coherent run, then measure a
    # single-line source against that calibration
    traces = tesspec.simulate_coherent(1062.9, 1.8, 6000, seed=12)
    check("simulate_coherent", len(traces) == 6000, f"{len(traces)} gates")
    master = tesspec.build_master(traces)
    check("build_master", len(master.template()) == traces.samples_per_record())
    areas, accepted = tesspec.analyze(traces, master)
    check("analyze acceptance", sum(accepted) > 5900, f"{sum(accepted)}/6000 accepted")
    cal = tesspec.calibrate(areas, accepted, 1062.9)
    check("calibration slope positive", cal.a1 > 0.0, f"a1 = {cal.a1:.5f}")
    check("soft saturation bends down", cal.a2 < 0.0, f"a2 = {cal.a2:.2e}")
    k1 = cal.invert(cal.peak_means()[1])
    check("one-photon peak inverts to ≈1.1665 eV", abs(k1 - 1.1665) < 0.02, f"{k1:.4f} eV")

    line = tesspec.simulate_single_line(1100.0, 8000, seed=34)
    l_areas, l_accepted = tesspec.analyze(line, master)
    energies = [cal.invert(a) for a, ok in zip(l_areas, l_accepted) if ok]
    expect = tesspec.photon_energy_ev(1100.0)
    ev, ev_err, nm, nm_err, n = tesspec.estimate_line(energies, 0.5 * expect, 1.5 * expect)
    # this is a deliberately small run (6k-gate calibration); the full-size
    # acceptance suite holds the ±2 nm target
    check("line recovered within ±3 nm", abs(nm - 1100.0) < 3.0, f"{nm:.2f} ± {nm_err:.2f} nm, {n} counts")
    check("stderr propagated", abs(nm_err - nm * ev_err / ev) < 1e-9)

    # parametric-source theory: degeneracy and a short tuning curve
    deg = tesspec.find_degeneracy(30.0, 60.0)
    check("degeneracy in 30–60 °C", deg is not None)
    t_deg, lam_s, lam_p = deg
    check("degenerate signal at 2×pump", abs(lam_s - 2.0 * lam_p) < 0.001, f"{lam_s:.4f} vs 2×{lam_p:.4f}")
    points = tesspec.tuning_curve(t_deg + 4.0, t_deg + 5.0, 0.05, m_halfwidth=3000)
    check("tuning curve has points", len(points) >= 3, f"{len(points)} points")
    straddle = all(ls < 2.0 * lam_p < li for (_, ls, li) in points)
    check("curve branches straddle degeneracy", straddle)

    print(f"all {checks} smoke checks passed")


if __name__ == "__main__":
    main()

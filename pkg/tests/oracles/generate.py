"""Regenerate tests/data/oracle_values.json from methods independent of the package.

Longitudinal (no diffraction) dynamics have closed-form Green's functions:
storage beta(z) = -C int_0^1 J0(2C sqrt(z (1 - e))) alpha(e) de and forward
retrieval alpha(e) = C int_0^1 J0(2C sqrt(e (1 - z))) beta(z) dz. The kernels
are discretized with a fine midpoint Nystrom rule; nothing from ``qmem`` is
imported. Design numbers use only literal constants and ``math``.

    python3 tests/oracles/generate.py
"""

import json
import math
from pathlib import Path

import numpy as np
from scipy.integrate import quad
from scipy.special import j0

N = 2000
C_VALUES = (0.5, 1.0, 2.0, 3.0)


def kernel_values(C: float) -> dict:
    x = (np.arange(N) + 0.5) / N
    K = C * j0(2 * C * np.sqrt(np.outer(x, 1 - x))) / N
    S = -K  # storage
    R = K  # retrieval in the forward direction
    _, s, vh = np.linalg.svd(S)
    a = vh[0].conj()
    b = S @ a
    return {
        "sigma2": float(s[0] ** 2),
        "sigma2_second": float(s[1] ** 2),
        "nu_forward": float(np.linalg.norm(R @ b) ** 2),
        "nu_backward": float(np.linalg.norm(R @ b[::-1]) ** 2),
    }


def gaussian_storage(C: float, zetas) -> list:
    """beta(zeta) for alpha(e) = exp(-(e - 0.5)^2 / (2 * 0.1^2)) by adaptive quadrature."""
    alpha = lambda e: math.exp(-((e - 0.5) ** 2) / (2 * 0.01))
    out = []
    for z in zetas:
        v, _ = quad(lambda e: -C * j0(2 * C * math.sqrt(z * (1 - e))) * alpha(e), 0, 1, epsabs=1e-14, epsrel=1e-13, limit=200)
        out.append(v)
    return out


def design_values() -> dict:
    c = 299792458.0
    kB = 1.380649e-23
    M = 2.21e-25
    two_pi = 2 * math.pi
    w1m = two_pi * 351.7e12
    ws = w1m + two_pi * 10e9
    w13 = two_pi * 9.2e9
    theta = math.acos(ws / (ws + w13))
    kc = (ws + w13) / c
    out = {"theta_c": theta, "fidelity": {}, "mode_count": {}}
    for Te, ts in ((360.0, 10e-9), (360.0, 40e-9), (300.0, 100e-9)):
        expo = kc * kc * theta * theta * ts * ts * kB * Te / M
        out["fidelity"][f"{Te}:{ts}"] = math.exp(-expo)
    out["t_s_F09"] = math.sqrt(-math.log(0.9) * M / (kB * 360.0)) / (kc * theta)
    lam = 852e-9
    for L, A, dmax_hz in ((0.02, 1e-7, 0.0), (1e-3, 1e-7, 0.0), (1e-3, 4e-7, 50e9)):
        dth = lam / math.sqrt(A)
        raw = (math.sqrt(A) / L - math.sqrt(2 * w13 / (w1m + two_pi * dmax_hz))) / dth
        out["mode_count"][f"{L}:{A}:{dmax_hz}"] = max(0, math.floor(raw))
    out["colinear_slope_2cm"] = 2 * w13 / c * 0.02
    return out


def main():
    data = {
        "kernel": {str(C): kernel_values(C) for C in C_VALUES},
        "gaussian_storage": {
            "zeta": [0.0, 0.25, 0.5, 0.75, 1.0],
            "beta": {str(C): gaussian_storage(C, [0.0, 0.25, 0.5, 0.75, 1.0]) for C in (1.0, 2.0)},
        },
        "design": design_values(),
    }
    path = Path(__file__).resolve().parents[1] / "data" / "oracle_values.json"
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()

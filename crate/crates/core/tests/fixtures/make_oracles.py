"""Reference values for tests/oracles.rs, computed with numpy, scipy and statsmodels.

Run from crates/core: python3 tests/fixtures/make_oracles.py > tests/fixtures/oracles.json
"""
import json

import numpy as np
import pandas as pd
import scipy.linalg
import scipy.optimize
import statsmodels.api as sm
from statsmodels.stats.diagnostic import acorr_breusch_godfrey
from statsmodels.tsa.stattools import adfuller, kpss, coint

df = pd.read_csv("tests/fixtures/panel.csv")
y = df["y"].to_numpy()
x3, x5 = df["x3"].to_numpy(), df["x5"].to_numpy()
T = len(y)
out = {}

X = np.column_stack([x3, x5, np.ones(T)])
beta, *_ = np.linalg.lstsq(X, y, rcond=None)
resid = y - X @ beta
out["ols_levels"] = {"params": beta.tolist(), "ssr": float(resid @ resid)}

ols = sm.OLS(y, X).fit()
lm, lmp, _, _ = acorr_breusch_godfrey(ols, nlags=2)
out["bg_raw"] = {"lm": float(lm), "p": float(lmp)}

out["adf"] = []
for reg, case in [("n", "0"), ("c", "C"), ("ct", "CT")]:
    for name in ["y", "x3"]:
        s = df[name].to_numpy()
        fixed = adfuller(s, maxlag=0, regression=reg, autolag=None)
        bic = adfuller(s, maxlag=4, regression=reg, autolag="BIC")
        out["adf"].append({
            "series": name, "case": case,
            "stat_lag0": float(fixed[0]),
            "stat_bic": float(bic[0]), "lag_bic": int(bic[2]), "p_bic": float(bic[1]),
        })

def nw_bandwidth(e):
    n = len(e)
    pilot = int(np.floor(4 * (n / 100) ** (2 / 9)))
    g = np.array([e[j:] @ e[: n - j] / n for j in range(pilot + 1)])
    s0 = g[0] + 2 * g[1:].sum()
    s1 = 2 * (np.arange(1, pilot + 1) * g[1:]).sum()
    return int(np.floor(1.1447 * ((s1 / s0) ** 2) ** (1 / 3) * n ** (1 / 3)))

rng = np.random.default_rng(20240611)
e = rng.standard_normal(320)
u = np.zeros(320)
for i in range(2, 320):
    u[i] = 0.6 * u[i - 1] + 0.25 * u[i - 2] + e[i]
zser = np.cumsum(u[200:])
pd.DataFrame({"year": np.arange(1881, 2001), "z": zser}).to_csv("tests/fixtures/ar_series.csv", index=False, float_format="%.17g")
for reg, case in [("c", "C"), ("ct", "CT")]:
    bic = adfuller(zser, maxlag=6, regression=reg, autolag="BIC")
    out["adf"].append({
        "series": "z", "case": case,
        "stat_lag0": float(adfuller(zser, maxlag=0, regression=reg, autolag=None)[0]),
        "stat_bic": float(bic[0]), "lag_bic": int(bic[2]), "p_bic": float(bic[1]),
    })

out["kpss"] = []
for reg, case in [("c", "C"), ("ct", "CT")]:
    for name in ["y", "x3"]:
        s = df[name].to_numpy()
        D = np.ones((T, 1)) if reg == "c" else np.column_stack([np.ones(T), np.arange(1, T + 1)])
        e = s - D @ np.linalg.lstsq(D, s, rcond=None)[0]
        bw = nw_bandwidth(e)
        stat = kpss(s, regression=reg, nlags=bw)[0]
        out["kpss"].append({"series": name, "case": case, "bandwidth": bw, "stat": float(stat)})

eg = coint(y, np.column_stack([x3, x5]), trend="c", maxlag=0, autolag=None)
out["eg"] = {"stat": float(eg[0])}

dy, ylag = np.diff(y), y[:-1]
xs, xls = [x3[1:], x5[1:]], [x3[:-1], x5[:-1]]
t = np.arange(2, T + 1, dtype=float)

def ec_resid(p, trend, phi_free):
    b = p[:2]
    c = p[2]
    d = p[3] if trend else 0.0
    phi = p[-1] if phi_free else 0.0
    dx = sum(bi * (xi - xli) for bi, xi, xli in zip(b, xs, xls))
    lev = ylag - c - d * t - sum(bi * xli for bi, xli in zip(b, xls))
    return dy - dx - d * phi - (phi - 1) * lev

out["ec"] = []
for trend in [False, True]:
    k = 4 if trend else 3
    p0 = np.concatenate([beta[:2], [beta[2]], [0.0] if trend else [], [0.3]])
    sol = scipy.optimize.least_squares(ec_resid, p0, args=(trend, True), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    J = sol.jac
    r = sol.fun
    n = len(r)
    s2 = r @ r / (n - len(p0))
    cov = s2 * np.linalg.inv(J.T @ J)
    out["ec"].append({
        "id": "L|CT|x3,x5|phi" if trend else "L|C|x3,x5|phi",
        "params": sol.x.tolist(), "ssr": float(r @ r), "se": np.sqrt(np.diag(cov)).tolist(),
    })
    sol0 = scipy.optimize.least_squares(ec_resid, p0[:-1], args=(trend, False), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
    out["ec"].append({
        "id": "L|CT|x3,x5|nophi" if trend else "L|C|x3,x5|nophi",
        "params": sol0.x.tolist(), "ssr": float(sol0.fun @ sol0.fun), "se": None,
    })

Dsr = np.column_stack([np.diff(x3), np.diff(x5), np.ones(T - 1)])
bsr, *_ = np.linalg.lstsq(Dsr, dy, rcond=None)
rsr = dy - Dsr @ bsr
out["short_run"] = {"params": bsr.tolist(), "ssr": float(rsr @ rsr)}

Z = np.column_stack([y, x3, x5])
out["johansen"] = {}
for case in ["a", "b"]:
    z0 = np.diff(Z, axis=0)
    extra = np.ones(T - 1) if case == "a" else np.arange(2, T + 1, dtype=float)
    z1 = np.column_stack([Z[:-1], extra])
    if case == "b":
        z0 = z0 - z0.mean(axis=0)
        z1 = z1 - z1.mean(axis=0)
    n = T - 1
    S00, S01, S11 = z0.T @ z0 / n, z0.T @ z1 / n, z1.T @ z1 / n
    lam = scipy.linalg.eigh(S01.T @ np.linalg.solve(S00, S01), S11, eigvals_only=True)[::-1][:3]
    trace = [float(-n * np.log(1 - lam[r:]).sum()) for r in range(3)]
    out["johansen"][case] = {"eigenvalues": lam.tolist(), "trace": trace}

print(json.dumps(out, indent=1))

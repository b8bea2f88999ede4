"""Acceptance gate: every criterion at its stated tolerance and runtime budget.

The full shipped suite is run once through the CLI with one worker and once
with eight; each criterion is then recomputed from the per-trial records of
the serial run, independently of the verdicts the drivers wrote. Every test
prints one ``CRITERION k: PASS|FAIL`` line.
"""

from __future__ import annotations

import json
import math
import re
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from poisson_er.experiments import shipped_config
from poisson_er.stochastic_kernel import RandomStream, reference_marginals

SIGNIFICANCE = 1e-3
BETA_2 = 0.7968121300200199
SD_POISSONIZED_2 = 1.503717753349093
CONNECT_LIMIT = {0.0: 0.36787944117144233, 1.0: 0.6922006275553464, 5.0: 0.9932847020678415}
P_CONNECTED_3 = 0.216

# Runtime budgets in seconds, per shipped config.
BUDGET = {
    "giant": 120,
    "giant_subcritical": 60,
    "walk_law": 120,
    "oracle": 60,
    "fluid": 180,
    "giant_clt": 300,
    "kc": 300,
    "critical": 300,
    "tau_clt": 60,
    "connectedness": 600,
    "connectedness_small": 10,
    "depoissonize": 60,
}


def _run_all(out_dir: Path, workers: int) -> dict[str, float]:
    proc = subprocess.run(
        [sys.executable, "-m", "poisson_er", "all", "--workers", str(workers), "--out-dir", str(out_dir)],
        capture_output=True,
        text=True,
        check=False,
    )
    if proc.returncode not in (0, 1):
        raise RuntimeError(f"suite crashed ({proc.returncode}):\n{proc.stderr}")
    times = {}
    for name, seconds in re.findall(r"^\[TIME\] (\S+): ([\d.]+)s", proc.stdout, re.M):
        times[name] = float(seconds)
    return times


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    serial = tmp_path_factory.mktemp("serial")
    parallel = tmp_path_factory.mktemp("parallel")
    times = _run_all(serial, 1)
    _run_all(parallel, 8)
    return {"serial": serial, "parallel": parallel, "times": times}


def load(suite, name):
    seed = shipped_config(name).seed
    return json.loads((suite["serial"] / f"{name}_{seed}.json").read_text())


def rows(report, **match):
    return [r for r in report["per_trial"] if all(r[k] == v for k, v in match.items())]


def verdict(number, checks, detail, capsys):
    passed = all(checks)
    with capsys.disabled():
        print(f"\nCRITERION {number}: {'PASS' if passed else 'FAIL'} {detail}")
    assert passed, detail


def in_budget(suite, *names):
    spent = {n: suite["times"].get(n, math.inf) for n in names}
    return all(spent[n] <= BUDGET[n] for n in names), ", ".join(f"{n} {spent[n]:.1f}s/{BUDGET[n]}s" for n in names)


def test_criterion_01_giant_fraction(suite, capsys):
    n = 200000
    r = rows(load(suite, "giant"), n=n)
    largest = np.mean([x["largest"] for x in r]) / n
    second = np.mean([x["second"] for x in r]) / n
    ok_time, spent = in_budget(suite, "giant")
    verdict(
        1,
        [len(r) == 30, abs(largest - BETA_2) <= 0.005, second < 0.005, ok_time],
        f"largest/n={largest:.5f} (beta={BETA_2:.6f} +/- 0.005), second/n={second:.2e} < 0.005, {spent}",
        capsys,
    )


def test_criterion_02_subcritical(suite, capsys):
    n = 100000
    r = rows(load(suite, "giant_subcritical"), n=n)
    largest = np.mean([x["largest"] for x in r]) / n
    ok_time, spent = in_budget(suite, "giant_subcritical")
    verdict(2, [len(r) == 30, largest < 0.01, ok_time], f"largest/n={largest:.2e} < 0.01, {spent}", capsys)


def test_criterion_03_walk_law(suite, capsys):
    report = load(suite, "walk_law")
    steps = 5
    graph = [tuple(x[f"g{k}"] for k in range(1, steps + 1)) for x in report["per_trial"]]
    analytic = [tuple(x[f"a{k}"] for k in range(1, steps + 1)) for x in report["per_trial"]]
    cells = sorted(set(graph) | set(analytic))
    index = {c: i for i, c in enumerate(cells)}
    table = np.zeros((2, len(cells)))
    for row, sample in enumerate((graph, analytic)):
        np.add.at(table[row], [index[c] for c in sample], 1)
    # Independent recomputation: contingency test after pooling cells with expected count < 5.
    common = table.sum(axis=0) >= 10
    pooled = np.column_stack((table[:, common], table[:, ~common].sum(axis=1)))
    chi2, pvalue, _, _ = stats.chi2_contingency(pooled, correction=False)
    v = report["verdicts"]["joint_increment_law"]
    ok_time, spent = in_budget(suite, "walk_law")
    verdict(
        3,
        [len(graph) == 10**5, pvalue >= SIGNIFICANCE, v["passed"], ok_time],
        f"contingency chi2={chi2:.1f} p={pvalue:.3g} >= 1e-3; driver stat={v['observed']:.1f} <= {v['threshold']:.1f}, {spent}",
        capsys,
    )


def test_criterion_04_oracle(suite, capsys):
    report = load(suite, "oracle")
    mismatches = sum(not x["match"] for x in report["per_trial"])
    sizes = {x["n"] for x in report["per_trial"]}
    ok_time, spent = in_budget(suite, "oracle")
    verdict(
        4,
        [len(report["per_trial"]) == 10**4, mismatches == 0, max(sizes) <= 30, ok_time],
        f"mismatches={mismatches} over {len(report['per_trial'])} instances, {spent}",
        capsys,
    )


def test_criterion_05_fluid(suite, capsys):
    r = rows(load(suite, "fluid"), n=10**6)
    below = sum(x["sup_dev"] < 0.005 for x in r)
    ok_time, spent = in_budget(suite, "fluid")
    verdict(5, [len(r) == 20, below >= 19, ok_time], f"{below}/20 trials with sup deviation < 0.005, {spent}", capsys)


def test_criterion_06_giant_clt(suite, capsys):
    n = 100000
    r = rows(load(suite, "giant_clt"), n=n)
    z = np.array([(x["J"] - BETA_2 * n) / math.sqrt(n) for x in r])
    sd = z.std(ddof=1)
    ks = stats.kstest(z, stats.norm(scale=SD_POISSONIZED_2).cdf).statistic
    threshold = stats.kstwobign.isf(SIGNIFICANCE) / math.sqrt(z.size)
    ok_time, spent = in_budget(suite, "giant_clt")
    verdict(
        6,
        [z.size == 2000, abs(sd - SD_POISSONIZED_2) <= 0.1 * SD_POISSONIZED_2, ks <= threshold, ok_time],
        f"sd={sd:.4f} (target {SD_POISSONIZED_2:.4f} +/- 10%), KS={ks:.4f} <= {threshold:.4f}, {spent}",
        capsys,
    )


def test_criterion_07_kc(suite, capsys):
    report = load(suite, "kc")
    kc = np.array([x["kc"] for x in report["per_trial"]])
    success = 1.0 / (1.0 + kc.mean())
    gof = report["verdicts"]["n=100000:geometric_gof"]
    # Independent GOF: pool the tail at the first k with expected count < 5.
    top = 0
    while kc.size * success * (1 - success) ** (top + 1) >= 5:
        top += 1
    observed = np.append(np.bincount(np.minimum(kc, top + 1), minlength=top + 2)[: top + 1], np.sum(kc > top))
    expected = kc.size * np.append(success * (1 - success) ** np.arange(top + 1), (1 - success) ** (top + 1))
    pvalue = stats.chisquare(observed, expected, ddof=1).pvalue
    ok_time, spent = in_budget(suite, "kc")
    verdict(
        7,
        [kc.size == 2000, abs(success - BETA_2) <= 0.03, gof["passed"], pvalue >= SIGNIFICANCE, ok_time],
        f"success={success:.4f} (beta={BETA_2:.4f} +/- 0.03), GOF stat={gof['observed']:.2f} <= {gof['threshold']:.2f}, "
        f"independent p={pvalue:.3g}, {spent}",
        capsys,
    )


def test_criterion_08_critical(suite, capsys):
    report = load(suite, "critical")
    config = shipped_config("critical")
    m1 = np.array([x["m1"] for x in rows(report, n=100000)])
    ref = reference_marginals(RandomStream(config.seed, 2**63), 0.0, [1.0, 2.0, 3.0], 10**4, 0.01)[:, 0]
    ks = stats.ks_2samp(m1, ref).statistic
    n_eff = m1.size * ref.size / (m1.size + ref.size)
    threshold = stats.kstwobign.isf(SIGNIFICANCE) / math.sqrt(n_eff)
    medians = {n: np.median([x["max_excursion"] for x in rows(report, n=n)]) for n in (10000, 100000)}
    ratio = medians[100000] / medians[10000]
    ok_time, spent = in_budget(suite, "critical")
    verdict(
        8,
        [m1.size == 2000, ks <= threshold, 0.7 <= ratio <= 1.4, ok_time],
        f"KS(t=1)={ks:.4f} <= {threshold:.4f}, median ratio={ratio:.3f} in [0.7, 1.4], {spent}",
        capsys,
    )


def test_criterion_09_tau(suite, capsys):
    tau = np.array([x["tau"] for x in rows(load(suite, "tau_clt"), n=10000)], dtype=float)
    ok_time, spent = in_budget(suite, "tau_clt")
    mean, sd = tau.mean(), tau.std(ddof=1)
    verdict(
        9,
        [tau.size == 1000, abs(mean - 10**4) <= 10, 90 <= sd <= 110, ok_time],
        f"mean={mean:.2f} (1e4 +/- 10), sd={sd:.2f} in [90, 110], {spent}",
        capsys,
    )


def test_criterion_10_connectedness(suite, capsys):
    report = load(suite, "connectedness")
    checks, parts = [], []
    for c, target in CONNECT_LIMIT.items():
        r = rows(report, c=c, n=5000)
        fixed = np.mean([x["fixed"] for x in r])
        poi = np.mean([x["poissonized"] for x in r])
        checks += [len(r) == 4000, abs(fixed - target) <= 0.05, abs(poi - target) <= 0.05]
        parts.append(f"c={c:g}: fixed={fixed:.4f} poissonized={poi:.4f} (target {target:.4f})")
    ok_time, spent = in_budget(suite, "connectedness")
    verdict(10, checks + [ok_time], "; ".join(parts) + f", {spent}", capsys)


def test_criterion_11_small_n(suite, capsys):
    r = rows(load(suite, "connectedness_small"), n=3)
    freq = np.mean([x["fixed"] for x in r])
    ok_time, spent = in_budget(suite, "connectedness_small")
    verdict(11, [len(r) == 10**5, abs(freq - P_CONNECTED_3) <= 0.01, ok_time], f"P={freq:.5f} (0.216 +/- 0.01), {spent}", capsys)


def test_criterion_12_depoissonization(suite, capsys):
    r = rows(load(suite, "depoissonize"), n=10000)
    lower = np.mean([x["lower_ok"] for x in r])
    upper = np.mean([x["upper_ok"] for x in r])
    nested = all(x["nested"] for x in r)
    ok_time, spent = in_budget(suite, "depoissonize")
    verdict(
        12,
        [len(r) == 10**4, lower >= 0.97, upper >= 0.97, nested, ok_time],
        f"P(N-<=n)={lower:.4f}, P(N+>=n)={upper:.4f} (>= 0.97), nesting in every trial={nested}, {spent}",
        capsys,
    )


def test_criterion_13_determinism(suite, tmp_path, capsys):
    serial = sorted(p.name for p in suite["serial"].iterdir())
    parallel = sorted(p.name for p in suite["parallel"].iterdir())
    differing = [name for name in serial if (suite["serial"] / name).read_bytes() != (suite["parallel"] / name).read_bytes()]
    # Same seed, same worker count, twice: a reduced run of every driver.
    reruns = []
    for attempt in range(2):
        out = tmp_path / f"rerun{attempt}"
        subprocess.run(
            [sys.executable, "-m", "poisson_er", "all", "--trials", "3", "--out-dir", str(out)],
            capture_output=True,
            check=False,
        )
        reruns.append({p.name: p.read_bytes() for p in out.iterdir()})
    verdict(
        13,
        [serial == parallel, len(serial) == 2 * len(BUDGET), not differing, reruns[0] == reruns[1], len(reruns[0]) == len(serial)],
        f"{len(serial)} files identical across --workers 1 and 8 (differing: {differing}); rerun identical={reruns[0] == reruns[1]}",
        capsys,
    )

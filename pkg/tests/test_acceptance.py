"""Acceptance criteria, one test per criterion.

Every test prints a single ``[PASS]``/``[FAIL]`` line (visible with ``-s``);
the same lines are repeated in the pytest terminal summary. Run just this
module with ``pytest tests/test_acceptance.py``.
"""

import time

import conftest
import numpy as np
import pytest
from mnist_fixture import mnist_idx_pair
from oracles import penalized_objective, simplex_projection_qp

from simplexcode import cli
from simplexcode.clustering import clustering_accuracy, kmeans, spectral_cluster
from simplexcode.datasets import gen_circle, gen_two_moons, load_idx
from simplexcode.encoder import default_step_size, encode
from simplexcode.kds import (
    IMAGE_LAMBDA,
    TrainConfig,
    loss_gradient_A,
    train,
    unrolled_loss,
)
from simplexcode.oracle import certify
from simplexcode.simplex import (
    PenalizedLossParams,
    loss_gradient_x,
    penalized_loss,
    project_simplex,
    weighted_l1,
    weighted_l1_about,
)


def report(number, ok, text):
    status = "PASS" if ok else "FAIL"
    conftest.ACCEPTANCE_LINES.append((number, status, text))
    print(f"\n[{status}] criterion {number}: {text}")
    assert ok, text


@pytest.fixture(scope="module")
def campaign():
    start = time.perf_counter()
    result = certify(m=12, d=2, instances=100, points=20, min_weight=1e-3, seed=0)
    return result, time.perf_counter() - start


def test_criterion_01_l1_certification(campaign):
    result, seconds = campaign
    cases = sum(len(inst["points"]) for inst in result["instances"])
    rate = result["l1_pass_rate"]
    report(1, cases == 2000 and rate == 1.0 and seconds < 30,
           f"weighted l1 support = enclosing cell in {rate:.2%} of {cases} cases, {seconds:.1f}s (need 100%, <30s)")


def test_criterion_02_l0_certification(campaign):
    result, _ = campaign
    points = [p for inst in result["instances"] for p in inst["points"]]
    agree = np.mean([p["l0_support"] == p["cell"] for p in points])
    strict = result["l0_pass_rate"]
    report(2, strict == 1.0,
           f"weighted l0 support = enclosing cell in {agree:.2%} of {len(points)} cases, "
           f"strictly minimal in {strict:.2%} (need 100%)")


def test_criterion_03_projection_oracle():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(1000):
        m = int(rng.integers(1, 7))
        v = rng.normal(scale=rng.choice([0.01, 1.0, 100.0]), size=m)
        worst = max(worst, float(np.abs(project_simplex(v) - simplex_projection_qp(v)).max()))
    report(3, worst <= 1e-10, f"max componentwise gap to active-set QP oracle {worst:.2e} over 1000 vectors (need <= 1e-10)")


def _fd_grad_A(A, y, params, h=1e-5):
    base = encode(A, y, params).active_sets
    fd = np.zeros_like(A)
    flipped = False
    for idx in np.ndindex(*A.shape):
        E = np.zeros_like(A)
        E[idx] = h
        for sign in (1, -1):
            flipped |= not np.array_equal(encode(A + sign * E, y, params).active_sets, base)
        fd[idx] = (unrolled_loss(A + E, y, params) - unrolled_loss(A - E, y, params)) / (2 * h)
    return fd, flipped


def test_criterion_04_gradients():
    rng = np.random.default_rng(4)
    worst_x = 0.0
    h = 1e-6
    for _ in range(100):
        d, m = int(rng.integers(2, 6)), int(rng.integers(2, 9))
        A = rng.standard_normal((d, m))
        y = rng.standard_normal(d)
        x = rng.dirichlet(np.ones(m))
        lam = float(rng.uniform(0, 1))
        fd = np.array([(penalized_objective(A, y, x + h * e, lam) - penalized_objective(A, y, x - h * e, lam)) / (2 * h)
                       for e in np.eye(m)])
        worst_x = max(worst_x, np.linalg.norm(loss_gradient_x(A, y, x, lam) - fd) / np.linalg.norm(fd))

    worst_A, checked, skipped = 0.0, 0, 0
    while checked < 50:
        A = rng.uniform(size=(2, 8))
        y = A @ rng.dirichlet(np.ones(8)) + 0.05 * rng.standard_normal(2)
        lam = float(rng.choice([0.0, 1e-2, 0.3]))
        params = PenalizedLossParams(lam=lam, step_size=default_step_size(A), unroll_depth=20)
        fd, flipped = _fd_grad_A(A, y, params)
        if flipped:
            skipped += 1
            continue
        g = loss_gradient_A(A, y, encode(A, y, params), lam)
        worst_A = max(worst_A, np.abs(g - fd).max() / np.abs(fd).max())
        checked += 1
    report(4, worst_x <= 1e-6 and worst_A <= 1e-4,
           f"grad_x rel err {worst_x:.1e} (100 inst, need <= 1e-6); unrolled grad_A rel err {worst_A:.1e} "
           f"({checked} inst, {skipped} active-set flips resampled, need <= 1e-4)")


def test_criterion_05_center_shift():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(1000):
        d, m = int(rng.integers(1, 6)), int(rng.integers(1, 10))
        A = rng.standard_normal((d, m)) * rng.choice([0.1, 1.0, 10.0])
        x = rng.dirichlet(np.ones(m))
        y = A @ x
        c = rng.standard_normal(d) * 3
        lhs = weighted_l1(x, y, A)
        rhs = weighted_l1_about(x, A, c)
        # the right side is a difference of two sums, so measure relative to
        # the larger of those sums; lhs alone is 0 whenever y sits on an atom
        scale = max(abs(lhs), float(x @ np.sum((A - c[:, None]) ** 2, axis=0)))
        worst = max(worst, abs(lhs - rhs) / scale)
    report(5, worst <= 1e-9, f"max relative gap between the two sides {worst:.1e} over 1000 draws (need <= 1e-9)")


def test_criterion_06_self_consistency():
    rng = np.random.default_rng(6)
    shapes = [(2, 8), (5, 8), (10, 20)]
    worst_gap, worst_spread = -np.inf, 0.0
    for i in range(20):
        d, m = shapes[i % 3]
        lam = [1e-2, 1e-1][i % 2]
        A = rng.standard_normal((d, m))
        y = rng.standard_normal(d)
        params = PenalizedLossParams(lam=lam, unroll_depth=10000)
        traj = encode(A, y, params)
        worst_gap = max(worst_gap, penalized_loss(A, y, traj.iterates[500], lam) - penalized_loss(A, y, traj.final, lam))
        finals = [penalized_loss(A, y, encode(A, y, params, x0=rng.dirichlet(np.ones(m))).final, lam) for _ in range(10)]
        worst_spread = max(worst_spread, max(finals) - min(finals))
    report(6, worst_gap <= 1e-6 and worst_spread <= 1e-7,
           f"loss(x500) - loss(x10000) <= {worst_gap:.1e} (need <= 1e-6); restart spread {worst_spread:.1e} (need <= 1e-7)")


def test_criterion_07_two_moons():
    start = time.perf_counter()
    kds_acc, km_acc = [], []
    for seed in range(5):
        data = gen_two_moons(1000, 0.05, seed=seed)
        result = train(data, TrainConfig(seed=seed), m=16)
        kds_acc.append(clustering_accuracy(spectral_cluster(result.codes, 2, seed=seed), data.labels))
        km_acc.append(clustering_accuracy(kmeans(data.points.T, 2, seed=seed), data.labels))
    seconds = time.perf_counter() - start
    report(7, min(kds_acc) >= 0.95 and seconds < 300,
           f"KDS accuracy {', '.join(f'{a:.3f}' for a in kds_acc)} (need >= 0.95); "
           f"KM {', '.join(f'{a:.3f}' for a in km_acc)}; {seconds:.0f}s (need < 300s)")


# explicit locality weight for the circle run; the synthetic default is tuned
# for cluster separation and over-shrinks reconstructions on the circle
CIRCLE_LAMBDA = 0.02


def test_criterion_08_circle():
    sigma = 0.01
    lines, ok = [], True
    for seed in range(3):
        data = gen_circle(1000, sigma, seed=seed)
        result = train(data, TrainConfig(lam=CIRCLE_LAMBDA, seed=seed), m=10)
        used = result.atom_usage() > 0.01
        radial = np.abs(np.linalg.norm(result.dictionary[:, used], axis=0) - 1.0).max()
        err = np.linalg.norm(data.points - result.dictionary @ result.codes, axis=0).mean()
        ok &= bool(radial <= 0.1 and err <= 3 * sigma)
        lines.append(f"seed {seed}: {used.sum()} atoms used, max |r-1| {radial:.3f}, mean recon err {err:.4f}")
    report(8, ok, "; ".join(lines) + f" (lam={CIRCLE_LAMBDA}; need |r-1| <= 0.1, err <= {3 * sigma:.2f})")


def test_criterion_09_mnist(tmp_path_factory):
    pair = mnist_idx_pair(str(tmp_path_factory.mktemp("mnist")))
    if pair is None:
        conftest.ACCEPTANCE_LINES.append((9, "SKIP", "no MNIST IDX files and mlxtend not installed"))
        pytest.skip("MNIST data unavailable")
    start = time.perf_counter()
    acc, km = [], []
    for seed in range(3):
        data = load_idx(*pair, digits=(0, 3, 4, 6, 7), per_digit=200, seed=seed)
        result = train(data, TrainConfig(lam=IMAGE_LAMBDA, seed=seed), m=100)
        acc.append(clustering_accuracy(spectral_cluster(result.codes, 5, seed=seed), data.labels))
        km.append(clustering_accuracy(kmeans(data.points.T, 5, seed=seed), data.labels))
    seconds = time.perf_counter() - start
    report(9, min(acc) >= 0.80 and seconds < 1200,
           f"KDS accuracy {', '.join(f'{a:.3f}' for a in acc)} (need >= 0.80); "
           f"KM {', '.join(f'{a:.3f}' for a in km)}; {seconds:.0f}s (need < 1200s)")


def _tree(directory):
    return {p.relative_to(directory).as_posix(): p.read_bytes() for p in sorted(directory.rglob("*")) if p.is_file()}


def test_criterion_10_determinism(tmp_path):
    runs = [
        ["certify"],
        ["train"],
        ["gen", "circle"],
        ["gen", "moons"],
        ["gen", "delaunay-model"],
    ]
    same, codes = [], []
    for argv in runs:
        outs = []
        for copy in ("a", "b"):
            out = tmp_path / copy / "-".join(argv)
            codes.append(cli.main(argv + ["--seed", "7", "--out", str(out)]))
            outs.append(_tree(out))
        same.append(outs[0] == outs[1] and len(outs[0]) > 0)
    ok = all(same) and all(c == 0 for c in codes)
    detail = ", ".join(f"{' '.join(a)}: {'identical' if s else 'DIFFERENT'}" for a, s in zip(runs, same))
    report(10, ok, f"{detail}; exit codes {sorted(set(codes))}")

import numpy as np
import pytest

from galileo import kernels
from galileo.model import MixtureModel

from conftest import make_dataset

BACKENDS = sorted(kernels.available())


def problem(seed=0, n=3000, cards=(3, 5, 2, 7), k=6):
    rng = np.random.default_rng(seed)
    codes = np.stack([rng.integers(0, c, n) for c in cards], axis=1)
    ds = make_dataset(codes, list(cards), rng.random(n) + 0.5)
    counts = rng.random((k, ds.schema.width))
    counts[0, 0] = 0.0  # one hard zero
    m = MixtureModel(ds.schema, counts, np.ones(k), rng.dirichlet(np.ones(k)))
    with np.errstate(divide="ignore"):
        logtab = np.log(counts / counts.sum(axis=1, keepdims=True))
    return ds, logtab, np.log(m.priors)


def test_active_backend_is_known():
    assert kernels.BACKEND in BACKENDS
    with pytest.raises(ValueError):
        kernels.get("fortran")


@pytest.mark.parametrize("name", BACKENDS)
def test_em_pass_matches_dense_reference(name):
    ds, logtab, lp = problem()
    counts, sizes, ll, ndeg = kernels.get(name).em_pass(ds.flat_codes, ds.weights, logtab, lp, 1)
    joint = lp + logtab[:, ds.flat_codes].sum(axis=2).T
    top = joint.max(axis=1, keepdims=True)
    post = np.exp(joint - top)
    post /= post.sum(axis=1, keepdims=True)
    wp = post * ds.weights[:, None]
    onehot = np.zeros((ds.n_records, ds.schema.width))
    np.put_along_axis(onehot, ds.flat_codes, 1.0, axis=1)
    np.testing.assert_allclose(counts, wp.T @ onehot, rtol=1e-10)
    np.testing.assert_allclose(sizes, wp.sum(axis=0), rtol=1e-10)
    ref_ll = np.dot(ds.weights, top[:, 0] + np.log(np.exp(joint - top).sum(axis=1)))
    assert ll == pytest.approx(ref_ll, rel=1e-12)
    assert ndeg == 0


@pytest.mark.parametrize("threads", [1, 2, 5])
def test_backends_agree(threads):
    ds, logtab, lp = problem(seed=threads)
    results = [kernels.get(b).em_pass(ds.flat_codes, ds.weights, logtab, lp, threads)
               for b in BACKENDS]
    for other in results[1:]:
        np.testing.assert_allclose(other[0], results[0][0], rtol=1e-10)
        assert other[2] == pytest.approx(results[0][2], rel=1e-12)
    posts = [kernels.get(b).posterior_pass(ds.flat_codes, logtab, lp, threads) for b in BACKENDS]
    for other in posts[1:]:
        np.testing.assert_allclose(other[0], posts[0][0], rtol=1e-10, atol=1e-15)
        np.testing.assert_allclose(other[1], posts[0][1], rtol=1e-12)


@pytest.mark.parametrize("name", BACKENDS)
def test_fixed_thread_count_is_bit_exact(name):
    ds, logtab, lp = problem(seed=11)
    k = kernels.get(name)
    a = k.em_pass(ds.flat_codes, ds.weights, logtab, lp, 4)
    b = k.em_pass(ds.flat_codes, ds.weights, logtab, lp, 4)
    np.testing.assert_array_equal(a[0], b[0])
    assert a[2] == b[2]


@pytest.mark.parametrize("name", BACKENDS)
def test_degenerate_rows(name):
    ds = make_dataset([[0], [1]], [2])
    with np.errstate(divide="ignore"):
        logtab = np.log(np.array([[1.0, 0.0], [1.0, 0.0]]))
    lp = np.log([0.5, 0.5])
    counts, sizes, ll, ndeg = kernels.get(name).em_pass(ds.flat_codes, ds.weights, logtab, lp, 1)
    assert ndeg == 1 and ll == -np.inf
    np.testing.assert_allclose(sizes, [1.0, 1.0])
    post, rec, nd = kernels.get(name).posterior_pass(ds.flat_codes, logtab, lp, 1)
    np.testing.assert_allclose(post[1], [0.5, 0.5])
    assert rec[1] == -np.inf and nd == 1


def test_benchmark_script_runs(tmp_path):
    import runpy
    from pathlib import Path
    script = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_kernels.py"
    mod = runpy.run_path(str(script))
    out = tmp_path / "bench.csv"
    mod["main"](["--sizes", "2000", "--threads", "1,2", "--repeats", "1", "--csv", str(out)])
    lines = out.read_text().splitlines()
    assert lines[0] == "n,threads,cython_s,python_s,speedup" and len(lines) == 3

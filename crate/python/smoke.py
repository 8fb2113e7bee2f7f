"""Smoke test for the Python extension.

Build and install first, e.g.
    maturin build --release -m crates/python/Cargo.toml && pip install target/wheels/reid_temporal-*.whl
then run `python python/smoke.py`.
"""

import math
import sys
import tempfile
from pathlib import Path

import reid_temporal as rt


def main() -> int:
    rec = rt.parse_filename("0001_c0900_t36000_frame0180000_0.jpg")
    assert rec["person_id"] == 1 and rec["camera"] == "c0900", rec

    gamma = rt.PriorSpec("gamma", loc=-0.1, scale=9.4, a=0.5)
    assert gamma.family == "gamma" and gamma.shape == {"a": 0.5}
    assert math.isclose(math.exp(gamma.log_pdf(5.0)), gamma.pdf(5.0), rel_tol=1e-12)
    assert rt.PriorSpec.from_json(gamma.to_json()).to_json() == gamma.to_json()
    samples = rt.PriorSpec("gamma", scale=3.0, a=2.0).sample(5000, 1)
    spec, ll = rt.fit_prior(samples, "gamma", loc=0.0)
    assert abs(spec.shape["a"] - 2.0) < 0.2 and math.isfinite(ll), spec

    with tempfile.TemporaryDirectory() as tmp:
        ds = rt.synth_generate(output_dir=tmp, seed=7)
        loaded = rt.Dataset.load(Path(tmp) / "manifest.txt", Path(tmp) / "features.ridf")
        assert loaded.num_queries == ds.num_queries == 50
        base = rt.evaluate(loaded)
        windowed = rt.evaluate(loaded, window=(0.0, 30.0))
        prior = rt.PriorSpec("gamma", scale=4.0, a=1.5)
        rankings, reranked = rt.rerank(loaded, 1.13, prior, window=(0.0, 30.0))
        assert len(rankings) == loaded.num_queries
        assert base["map"] < windowed["map"] < reranked["map"], (base["map"], windowed["map"], reranked["map"])
        spatial = rt.rerank(
            loaded, 1.13, prior, window=(0.0, 30.0), spatial="laplace", sigma_s=100.0,
            topology_csv=Path(tmp) / "topology.csv",
        )[1]
        print(f"mAP appearance {base['map']:.4f}  window {windowed['map']:.4f}  "
              f"temporal {reranked['map']:.4f}  spatial+temporal {spatial['map']:.4f}")

    rows = rt.run_benchmark()
    assert [r["method"] for r in rows] == ["appearance", "window", "temporal", "spatial_temporal"]

    try:
        rt.Dataset.load("nope.txt", "nope.ridf")
    except rt.ReidError as e:
        assert e.args[0] == "Io", e.args
    else:
        raise AssertionError("expected ReidError")

    print("python smoke test passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())

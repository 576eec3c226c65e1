#!/usr/bin/env python3
"""End-to-end smoke test for the bnbench_py extension module.

Build the extension first:

    cargo build -p bnbench-py

then run this script from the repository root:

    python3 python/smoke_test.py
"""

import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        REPO / "target" / profile / name
        for profile in ("debug", "release")
        for name in ("libbnbench_py.so", "libbnbench_py.dylib", "bnbench_py.dll")
    ]
    built = next((c for c in candidates if c.exists()), None)
    if built is None:
        print("extension not built; run: cargo build -p bnbench-py", file=sys.stderr)
        sys.exit(1)
    stage = Path(tempfile.mkdtemp(prefix="bnbench_py_"))
    target = stage / ("bnbench_py" + (".pyd" if built.suffix == ".dll" else ".so"))
    shutil.copy2(built, target)
    sys.path.insert(0, str(stage))
    import bnbench_py

    return bnbench_py


def main():
    bb = load_module()
    tmp = Path(tempfile.mkdtemp(prefix="bnbench_smoke_"))

    # graphs and transforms
    g = bb.rand_dag(8, 2.0, max_parents=3, seed=42)
    assert g.is_dag()
    c = bb.cpdag(g)
    assert bb.skeleton(c) == bb.skeleton(g)
    assert bb.v_structures(c) == bb.v_structures(g)
    band = bb.bandmat(6, 2)
    assert bb.is_chordal(band)

    # continuous pipeline: SEM -> data -> PC + tabu -> metrics
    sem = bb.sem_params(g, 0.25, 1.0, seed=7)
    data = sem.sample_iid(5000, standardized=True, seed=11)
    assert data.n == 5000 and data.p == 8
    pc_graph, ntests, _conflicts = bb.pc_learn(data, test="fisher_z", alpha=0.01)
    assert ntests > 0
    tabu_graph, tabu_score = bb.tabu_learn(data, score="bge", am=1.0)
    hc_graph, hc_score = bb.hc_learn(data, score="bge", am=1.0)
    assert tabu_score >= hc_score
    scores = bb.compare(bb.cpdag(g), bb.cpdag(tabu_graph))
    assert scores["shd"] <= 8, scores
    pc_scores = bb.compare(bb.skeleton(g), bb.skeleton(pc_graph))
    assert pc_scores["f1"] is None or pc_scores["f1"] > 0.7, pc_scores

    # discrete pipeline: CPTs -> data -> scores and tests
    bn = bb.bin_bn(g, 0.1, 0.9, seed=3)
    ddata = bn.sample_iid(2000, seed=5)
    assert ddata.is_categorical()
    local = bb.bdeu_local(ddata, 0, [], ess=1.0)
    assert local < 0
    total = bb.graph_score(ddata, g, score="bdeu", ess=1.0)
    assert math.isfinite(total)
    stat, p, indep, df, degen = bb.g2_test(ddata, 0, 1, [], alpha=0.05)
    assert 0.0 <= p <= 1.0 and df >= 1 and not degen

    # MCMC trajectory + diagnostics + file round trip
    traj = bb.mcmc_learn(ddata, iterations=2000, seed=99, score="bdeu", ess=1.0)
    assert traj.last_index() == 2000
    post = traj.edge_posterior(200)
    assert all(0.0 <= v <= 1.0 for row in post for v in row)
    traj_path = tmp / "traj.csv"
    traj.write(traj_path)
    back = bb.Trajectory.read(traj_path)
    assert back.records() == traj.records()

    # adjacency and data file round trips
    adj_path = tmp / "graph.csv"
    bb.write_adjmat(g, adj_path)
    assert bb.read_adjmat(adj_path) == g
    data_path = tmp / "data.csv"
    bb.write_data(ddata, data_path)
    assert bb.read_data(data_path).cardinalities() == ddata.cardinalities()

    # external plugin protocol
    plugin = "printf 'a,b\\n0,1\\n0,0\\n' > {adjmat} && echo 0.25 > {time} && echo None > {ntests}"
    toy = tmp / "toy.csv"
    toy.write_text("a,b\n0.1,0.2\n0.3,0.4\n")
    status, est, wall, nt = bb.run_external(plugin, toy, tmp / "plug", replicate=1)
    assert status == "ok" and est is not None and wall == 0.25 and nt is None

    # config runner end to end
    config = {
        "benchmark_setup": {
            "data": [
                {
                    "graph_id": "g",
                    "parameters_id": "p",
                    "data_id": "d",
                    "seed_range": [1, 2],
                }
            ],
            "evaluation": {"benchmarks": {"ids": ["hc-bge"]}},
        },
        "resources": {
            "graph": {"pcalg_randdag": [{"id": "g", "n": 5, "d": 2.0, "method": "er"}]},
            "parameters": {"sem_params": [{"id": "p", "min": 0.5, "max": 1.0}]},
            "data": {"iid": [{"id": "d", "sample_sizes": 100}]},
            "structure_learning_algorithms": {
                "bnlearn_hc": [{"id": "hc-bge", "score": "bge"}]
            },
        },
    }
    cfg_path = tmp / "config.json"
    cfg_path.write_text(json.dumps(config))
    summary = bb.validate_config(cfg_path)
    assert "learner 2" in summary, summary
    report = bb.run_config(cfg_path, cores=2, results_dir=tmp / "results")
    assert not report["hard_failure"], report
    assert report["learner_ok"] == 2, report
    bench_dir = tmp / "results" / "output"
    assert any(f.name.startswith("benchmarks_") for f in bench_dir.iterdir())

    # the CLI front end agrees with the library
    cli = REPO / "target" / "debug" / "bnbench"
    if cli.exists():
        out = subprocess.run(
            [str(cli), "validate", "--config", str(cfg_path)],
            capture_output=True,
            text=True,
        )
        assert out.returncode == 0, out.stderr

    print("smoke test OK")


if __name__ == "__main__":
    main()

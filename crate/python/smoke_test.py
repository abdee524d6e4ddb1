#!/usr/bin/env python3
"""Smoke test for the ancsat_py extension module.

Builds nothing itself: it looks for the cdylib produced by
`cargo build -p ancsat-py --release` (or a debug build), stages it under a
temp directory as an importable module, and exercises the main types and
operations end to end.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def import_ancsat_py():
    names = ["libancsat_py.so", "ancsat_py.so", "libancsat_py.dylib", "ancsat_py.pyd"]
    candidates = [
        REPO / "target" / profile / name
        for profile in ("release", "debug")
        for name in names
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit(
            "ancsat_py cdylib not found; run `cargo build -p ancsat-py --release` first"
        )
    stage = Path(tempfile.mkdtemp(prefix="ancsat_py_"))
    shutil.copy2(built, stage / "ancsat_py.so")
    sys.path.insert(0, str(stage))
    import ancsat_py

    return ancsat_py


def approx(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    m = import_ancsat_py()
    print(f"ancsat_py {m.__version__}")

    # PHY formulas
    approx(m.erasure_prob(1e-5, 1000), 0.009950215753652415, 1e-12)
    assert m.erasure_prob(0.0, 1000) == 0.0
    assert m.erasure_prob(1.0, 1000) == 1.0
    assert m.packet_symbols(1000, "bpsk") == 1000
    assert m.packet_symbols(1000, "8psk") == 334
    assert m.packet_symbols(1000, "16qam") == 250
    approx(m.ebn0_from_esn0(12.0, "16qam"), 12.0 - 10.0 * math.log10(4.0), 1e-12)
    assert m.ebn0_from_esn0(7.25, "bpsk") == 7.25
    pb = m.bit_error_prob(9.59, "bpsk")
    assert 0.9e-5 < pb < 1.1e-5, pb
    approx(m.symbol_energy_mw(0.0, -107.0), 10 ** (-10.7), 1e-22)

    # policy decisions
    assert m.decide_nc(4).batch_size == 4
    assert m.decide_anc(4, [0.5] * 16).batch_size == 8
    assert m.decide_ancef(4, [0.5] * 4, 1e-6).batch_size == 2
    assert m.decide_ancef(4, [0.0] * 4, 1e-3).silent
    d, delta = m.decide_stancef(4, [0.5] * 8, 1e-6)
    assert (d.batch_size, delta) == (2, 2)
    d = m.decide_ancmef(4, 40.0, [40.0] * 16)
    assert (d.batch_size, d.modulation) == (16, "16QAM")
    assert m.decide_ancmef(4, 0.0, [0.0] * 16).silent

    # traces
    tr = m.Trace.constant(12.0, 3200)
    assert len(tr) == 3200 and tr.esn0_db[0] == 12.0
    with tempfile.TemporaryDirectory() as d:
        path = str(Path(d) / "trace.csv")
        fading = m.Trace.open_area(500, seed=7, mean_esn0_db=12.0)
        fading.save(path)
        again = m.Trace.load(path)
        assert again.esn0_db == fading.esn0_db
        assert again.state_labels == fading.state_labels

    # one lossless run: exact single-batch metrics
    r = m.run_once("nc", m.Trace.constant(40.0, 3200), seed=1)
    assert r.delivered and r.packets_sent == 4 and r.trials_used == 1
    approx(r.delivery_delay_s, 4 * 1e-3 + 0.2388, 1e-15)
    # silence under the QoS ceiling costs nothing
    r = m.run_once("ancef", m.Trace.constant(0.0, 3200), seed=1)
    assert not r.delivered and r.packets_sent == 0 and r.energy_mw_s == 0.0

    # deterministic sweep, analytic agreement at the lossless point
    pts = m.run_sweep("nc", [0.0, 40.0], n_runs=64, seed=3, max_slots=500)
    again = m.run_sweep("nc", [0.0, 40.0], n_runs=64, seed=3, max_slots=500)
    assert [p.avg_delay_s for p in pts] == [p.avg_delay_s for p in again]
    assert pts[1].avg_packets == 4.0 and pts[1].delivery_rate == 1.0

    delay, residual = m.expected_delay("nc", m.Trace.constant(40.0, 600), horizon=500)
    approx(delay, 4 * 1e-3 + 0.2388, 1e-15)
    assert residual == 0.0
    approx(pts[1].avg_delay_s, delay, 1e-12)

    # config-driven experiment
    with tempfile.TemporaryDirectory() as d:
        cfg = f"""
[experiment]
schemes = ["nc", "ancef"]
esn0_grid_db = [0.0, 40.0]
output_dir = "{d}/out"
seed = 9

[sim]
n_runs = 16
max_slots = 400
"""
        sweep_csv, manifest = m.run_experiment(cfg)
        lines = Path(sweep_csv).read_text().splitlines()
        assert lines[0].startswith("scheme,esn0_db,avg_packets")
        assert len(lines) == 5
        assert "[experiment]" in Path(manifest).read_text()

    # errors surface as exceptions
    try:
        m.erasure_prob(1.5, 1000)
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError for p_b > 1")

    print("smoke test OK")


if __name__ == "__main__":
    main()

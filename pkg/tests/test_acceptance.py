"""Acceptance gate: the product's core guarantees, one pass/fail line each.

Each test exercises one contract end to end at its stated tolerance and
prints a single ``[ACCEPTANCE] <name>: PASS|FAIL`` line. The two slowest
checks (the six-horizon model sweep and its table-protocol twin) share one
module-scoped sweep so the suite stays within a coffee break.
"""

import functools
import json
import re
import threading
import time
from types import SimpleNamespace

import numpy as np
import pytest

from brickline import auth, dlinear as dl, evaluation, kernels, preprocess, stats, synth
from brickline.api import ApiService
from brickline.auth import CredentialsFile
from brickline.dlinear import HORIZONS, TrainConfig
from brickline.domain import SensorMeta, SensorSeries
from brickline.engine import Engine, EngineConfig
from brickline.evaluation import dlinear_factory, evaluate_sweep, snaive_factory
from brickline.ingest import resample_to_grid
from brickline.store import ResultsStore, RunRecord
from conftest import make_meta, make_regular
from test_api import api_json, wait_for_job
from test_dlinear import tiny_dataset

CELL_RE = re.compile(r"^\d+\.\d{3}±\d+\.\d{3}$")


def criterion(name):
    """Print exactly one pass/fail line per acceptance criterion."""
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                result = fn(*args, **kwargs)
            except BaseException:
                print(f"\n[ACCEPTANCE] {name}: FAIL", flush=True)
                raise
            print(f"\n[ACCEPTANCE] {name}: PASS", flush=True)
            return result
        return wrapper
    return deco


@pytest.fixture(scope="module", autouse=True)
def _warm_kernels():
    # JIT compilation happens once here so timed sections measure the
    # algorithms, not the compiler.
    kernels.warm_up()


# ---------------------------------------------------------------------------
# brute-force metric oracles (independent of the library implementations)

def brute_mae(yhat, y):
    total, n = 0.0, 0
    for f, a in zip(yhat.ravel().tolist(), y.ravel().tolist()):
        total += abs(f - a)
        n += 1
    return total / n


def brute_mse(yhat, y):
    total, n = 0.0, 0
    for f, a in zip(yhat.ravel().tolist(), y.ravel().tolist()):
        total += (f - a) ** 2
        n += 1
    return total / n


def brute_smape(yhat, y):
    total, n = 0.0, 0
    for f, a in zip(yhat.ravel().tolist(), y.ravel().tolist()):
        denom = abs(f) + abs(a)
        total += 0.0 if denom == 0.0 else 2.0 * abs(f - a) / denom
        n += 1
    return 100.0 * total / n


@criterion("metric oracle equivalence (1000 tensors, <1e-12, <5s)")
def test_criterion_01_metric_oracles():
    rng = np.random.Generator(np.random.PCG64(101))
    worst = 0.0
    t0 = time.perf_counter()
    for i in range(1000):
        shape = (int(rng.integers(1, 5)), int(rng.integers(1, 6)), int(rng.integers(1, 4)))
        yhat = rng.standard_normal(shape) * rng.uniform(0.1, 10.0)
        y = rng.standard_normal(shape) * rng.uniform(0.1, 10.0)
        if i % 7 == 0:
            y.ravel()[0] = 0.0          # exercise the zero guard
        if i % 11 == 0:
            yhat.ravel()[0] = y.ravel()[0]  # including an exact 0/0 term
        worst = max(worst,
                    abs(evaluation.mae(yhat, y) - brute_mae(yhat, y)),
                    abs(evaluation.mse(yhat, y) - brute_mse(yhat, y)),
                    abs(evaluation.smape(yhat, y) - brute_smape(yhat, y)))
    elapsed = time.perf_counter() - t0
    assert worst < 1e-12, f"max deviation {worst:.3e}"
    assert elapsed < 5.0, f"took {elapsed:.2f}s"


@criterion("SMAPE bounds and symmetry (10000 pairs incl. zeros)")
def test_criterion_02_smape_bounds_symmetry():
    rng = np.random.Generator(np.random.PCG64(102))
    for i in range(10_000):
        n = int(rng.integers(1, 5))
        a = rng.standard_normal(n) * rng.uniform(0.0, 5.0)
        b = rng.standard_normal(n) * rng.uniform(0.0, 5.0)
        if i % 5 == 0:
            a = np.zeros(n)
            b = np.zeros(n)
        elif i % 5 == 1:
            a = np.zeros(n)
        elif i % 5 == 2:
            b = np.zeros(n)
        fwd = evaluation.smape(a, b)
        assert 0.0 <= fwd <= 200.0
        assert fwd == evaluation.smape(b, a)


@criterion("quadratic imputation exactness (100 quadratics, rel err <1e-9)")
def test_criterion_03_quadratic_imputation():
    rng = np.random.Generator(np.random.PCG64(103))
    n = 2000
    t = np.arange(n, dtype=np.float64)
    for _ in range(100):
        a, b, c = rng.uniform(-5.0, 5.0, size=3)
        truth = a * t * t + b * t + c
        mask = np.ones(n, dtype=bool)
        for _ in range(int(rng.integers(5, 16))):
            start = int(rng.integers(2, n - 50))
            mask[start:start + int(rng.integers(1, 41))] = False
        mask[:2] = mask[-2:] = True  # gaps stay interior
        series = make_regular(truth, mask=mask)
        filled = preprocess.interpolate_quadratic(series).values
        rel = np.max(np.abs(filled - truth)) / np.max(np.abs(truth))
        assert rel < 1e-9, f"relative error {rel:.3e}"


@criterion("resampling grid law and bucket conservation (100 series)")
def test_criterion_04_resampling_grid_law():
    rng = np.random.Generator(np.random.PCG64(104))
    meta = make_meta(sensor_id="s-grid")
    base = 1_700_000_000
    for _ in range(100):
        n_pts = int(rng.integers(5, 400))
        ts = np.unique(base + rng.integers(0, 3 * 86_400, size=n_pts))
        series = SensorSeries(meta=meta, timestamps=ts,
                              values=rng.standard_normal(ts.size))
        grid = resample_to_grid(series)
        # grid law: timestamps are exactly start + 600*i, start/end floored
        assert grid.start == (ts[0] // 600) * 600
        assert grid.end == (ts[-1] // 600) * 600
        np.testing.assert_array_equal(
            grid.timestamps(), grid.start + 600 * np.arange(len(grid)))
        # conservation: observed slots are exactly the occupied buckets
        occupied = np.unique(ts // 600) - grid.start // 600
        np.testing.assert_array_equal(np.flatnonzero(grid.mask), occupied)


@criterion("analytic gradients vs central differences (>=100 configs, <1e-4, <60s)")
def test_criterion_05_gradient_check():
    rng = np.random.Generator(np.random.PCG64(105))
    t0 = time.perf_counter()
    checked = 0
    worst = 0.0
    for _ in range(100):
        S = int(rng.integers(4, 21))
        kernel = int(rng.choice([k for k in range(1, S + 1, 2)]))
        H = int(rng.integers(1, 9))
        C = int(rng.integers(1, 4))
        B = int(rng.integers(1, 5))
        params = (rng.standard_normal((H, S)) * 0.5,
                  rng.standard_normal((H, S)) * 0.5,
                  rng.standard_normal(H) * 0.5,
                  rng.standard_normal(H) * 0.5)
        x = rng.standard_normal((B, S, C))
        y = rng.standard_normal((B, H, C))
        _, grads = dl.loss_and_gradients(params, kernel, x, y)

        def loss_at(p):
            return dl.loss_and_gradients(p, kernel, x, y)[0]

        for ti, tensor in enumerate(params):
            flat_idx = rng.integers(0, tensor.size, size=min(3, tensor.size))
            for fi in np.unique(flat_idx):
                h = 1e-6 * max(1.0, abs(tensor.ravel()[fi]))
                bumped = [p.copy() for p in params]
                bumped[ti].ravel()[fi] += h
                up = loss_at(tuple(bumped))
                bumped[ti].ravel()[fi] -= 2 * h
                down = loss_at(tuple(bumped))
                fd = (up - down) / (2 * h)
                an = grads[ti].ravel()[fi]
                rel = abs(fd - an) / max(1.0, abs(fd), abs(an))
                worst = max(worst, rel)
                assert rel < 1e-4, f"grad mismatch {rel:.3e} (tensor {ti})"
                checked += 1
    elapsed = time.perf_counter() - t0
    assert checked >= 100
    assert elapsed < 60.0, f"took {elapsed:.2f}s"
    print(f"  ({checked} coordinates, worst rel err {worst:.2e}, {elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# planted-model recovery

def _planted_linear_model(rng, lookback, horizon, n_freq=4):
    """A random linear predictor whose exact trajectories are sinusoid sums.

    Frequencies away from 0 and π give a depth-2·n_freq recurrence
    x[t] = Σ rec[j]·x[t-1-j] satisfied exactly by Σ A_k sin(ω_k t + φ_k);
    unrolling it yields the H x S weight matrix of a planted linear model.
    """
    omegas = rng.uniform(0.15, np.pi - 0.15, size=n_freq)
    poly = np.array([1.0])
    for w in omegas:
        poly = np.convolve(poly, np.array([1.0, -2.0 * np.cos(w), 1.0]))
    rec = -poly[1:]
    depth = rec.size
    rows = np.zeros((horizon, lookback))
    rows[0, lookback - depth:] = rec[::-1]
    for h in range(1, horizon):
        row = np.zeros(lookback)
        for j in range(depth):
            k = h - 1 - j
            if k >= 0:
                row += rec[j] * rows[k]
            else:
                row[lookback + k] += rec[j]
        rows[h] = row
    return omegas, rows


@criterion("planted-model recovery (S=144, H=12, sigma=1e-3, val MSE <1e-3, <2min)")
def test_criterion_06_planted_recovery():
    rng = np.random.Generator(np.random.PCG64(106))
    S, H, T = 144, 12, 2400
    omegas, planted = _planted_linear_model(rng, S, H)
    t = np.arange(T, dtype=np.float64)
    clean = np.zeros(T)
    for w in omegas:
        clean += rng.uniform(0.5, 1.5) * np.sin(w * t + rng.uniform(0.0, 2 * np.pi))

    # sanity: every stride-1 window of the clean signal obeys the planted model
    starts = np.arange(0, T - S - H + 1, 97)
    x = clean[starts[:, None] + np.arange(S)[None, :]]
    y = clean[starts[:, None] + S + np.arange(H)[None, :]]
    consistency = np.max(np.abs(x @ planted.T - y))
    assert consistency < 1e-6, f"planted construction drifted: {consistency:.3e}"

    matrix = (clean + 1e-3 * rng.standard_normal(T))[:, None]
    dataset = tiny_dataset(matrix)
    t0 = time.perf_counter()
    _, tlog = dl.train(dataset, H, TrainConfig(seed=0))
    elapsed = time.perf_counter() - t0
    best = min(tlog.val_losses)
    assert best < 1e-3, f"best validation MSE {best:.3e}"
    assert elapsed < 120.0, f"took {elapsed:.1f}s"
    print(f"  (val MSE {best:.2e} at epoch {tlog.best_epoch}, {elapsed:.1f}s)")


@criterion("early-stop contract (stop at k+10, epoch-k weights restored)")
def test_criterion_08_early_stop_contract(monkeypatch):
    captured = {}
    schedule = [1.0, 0.9, 0.8, 0.7, 0.5] + [0.6] * 80
    calls = []

    def scripted(params, kernel, matrix, starts, lookback, horizon, chunk=512):
        calls.append(None)
        if len(calls) == 5:
            captured["params"] = tuple(p.copy() for p in params)
        return schedule[len(calls) - 1]

    monkeypatch.setattr(dl, "evaluate_mse", scripted)
    rng = np.random.Generator(np.random.PCG64(108))
    dataset = tiny_dataset(rng.standard_normal((400, 1)))
    model, tlog = dl.train(dataset, 12, TrainConfig(seed=2, lookback=24, kernel=7))
    k = 5
    assert tlog.best_epoch == k
    assert tlog.stop_epoch == k + 10
    assert tlog.val_losses == schedule[:k + 10]
    for got, want in zip(model.params(), captured["params"]):
        np.testing.assert_array_equal(got, want)


@criterion("channel-permutation equivariance (100 inputs, <=1e-12)")
def test_criterion_09_permutation_equivariance():
    rng = np.random.Generator(np.random.PCG64(109))
    worst = 0.0
    for _ in range(100):
        S = int(rng.integers(6, 25))
        kernel = int(rng.choice([k for k in range(1, S + 1, 2)]))
        H = int(rng.integers(1, 9))
        C = int(rng.integers(2, 6))
        model = dl.DLinearModel(
            lookback=S, horizon=H, kernel=kernel,
            w_trend=rng.standard_normal((H, S)),
            w_seasonal=rng.standard_normal((H, S)),
            b_trend=rng.standard_normal(H),
            b_seasonal=rng.standard_normal(H))
        x = rng.standard_normal((3, S, C))
        perm = rng.permutation(C)
        direct = dl.forward(model, x[:, :, perm])
        permuted = dl.forward(model, x)[:, :, perm]
        worst = max(worst, float(np.max(np.abs(direct - permuted))))
    assert worst <= 1e-12, f"max deviation {worst:.3e}"


# ---------------------------------------------------------------------------
# store durability under injected crashes

class SimulatedCrash(RuntimeError):
    pass


@criterion("store durability (1000 put/reopen cycles with injected crashes)")
def test_criterion_11_store_durability(tmp_path):
    rng = np.random.Generator(np.random.PCG64(111))
    expected = {}  # (building, run_id) -> RunRecord
    crashes = 0
    plan = {"mode": None, "run_file": None}

    def hook(path):
        if plan["mode"] == "record" and path.name == plan["run_file"]:
            raise SimulatedCrash(path)
        if plan["mode"] == "index" and path.name == "index.json":
            raise SimulatedCrash(path)

    for i in range(1000):
        building = f"b{i % 50:02d}"
        run_id = f"run-{i:04d}"
        roll = rng.random()
        plan["mode"] = None if roll < 0.5 else ("record" if roll < 0.8 else "index")
        plan["run_file"] = f"{run_id}.json"
        rec = RunRecord(run_id=run_id, building_id=building, model_id="dlinear",
                        horizon=12, created_at=i, config={"train": {"seed": i}},
                        status="done", metrics={"mae": float(rng.random())})
        writer = ResultsStore(tmp_path, fault_hook=hook)
        try:
            writer.put_run(rec)
            survived = True
        except SimulatedCrash:
            crashes += 1
            survived = plan["mode"] == "index"  # record landed before the index write
        if survived:
            expected[(building, run_id)] = rec

        reopened = ResultsStore(tmp_path)  # fresh instance: nothing cached
        if survived:
            assert reopened.get_run(run_id, building) == rec
        else:
            with pytest.raises(Exception):
                reopened.get_run(run_id, building)

    # zero completed records lost, with exact content
    verifier = ResultsStore(tmp_path)
    for (building, run_id), rec in expected.items():
        assert verifier.get_run(run_id, building) == rec
    # zero partial records admitted: every visible run file is an expected one
    seen = {(p.parent.parent.name, p.stem)
            for p in tmp_path.glob("*/runs/*.json")}
    assert seen == set(expected)
    # every crash left exactly one sweepable temp file and nothing else
    assert len(list(tmp_path.rglob("*.tmp"))) == crashes
    assert verifier.sweep_temp_files() == crashes
    assert list(tmp_path.rglob("*.tmp")) == []
    print(f"  ({len(expected)} durable records, {crashes} injected crashes)")


# ---------------------------------------------------------------------------
# end-to-end over HTTP

@criterion("end-to-end HTTP: ingest -> train {12,144} -> login -> forecast -> stats (<5min)")
def test_criterion_12_end_to_end_api(tmp_path):
    t0 = time.perf_counter()
    series = synth.make_building("bldg-e2e", n_days=10, n_channels=2, seed=21)
    meta_csv, data_csv = synth.write_fixture_csvs(series, tmp_path / "fixture")

    engine = Engine(EngineConfig(), store=ResultsStore(tmp_path / "store"))
    building_id, report = engine.ingest_csv(meta_csv, data_csv, name="E2E Fixture")
    assert report.records_rejected == 0

    creds_path = tmp_path / "creds.json"
    auth.write_credentials_file(creds_path, {"op": "letmein"})
    service = ApiService(engine, CredentialsFile.load(creds_path))
    server = service.make_server("127.0.0.1", 0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    base = f"http://127.0.0.1:{server.server_port}"
    try:
        status, body, _ = api_json(base, "POST", "/auth/login",
                                   body={"username": "op", "password": "letmein"})
        assert status == 200
        token = body["token"]

        status, job, _ = api_json(base, "POST", "/jobs/train", token=token,
                                  body={"building": building_id, "model": "dlinear",
                                        "horizons": [12, 144], "seed": 0})
        assert status == 202
        done = wait_for_job(base, token, job["job_id"], timeout=240.0)
        assert done["status"] == "done", done
        assert len(done["run_ids"]) == 2

        status, fc, _ = api_json(
            base, "GET", "/sensors/bldg-e2e-temp/forecast?horizon=144", token=token)
        assert status == 200
        assert len(fc["values_physical"]) == 144
        assert all(v is not None for v in fc["values_physical"])
        assert fc["model_id"] == "dlinear"

        status, st, _ = api_json(base, "GET", "/sensors/bldg-e2e-temp/stats",
                                 token=token)
        assert status == 200
        assert st["count"] == 10 * 144
    finally:
        server.shutdown()
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0, f"took {elapsed:.1f}s"
    print(f"  (end-to-end in {elapsed:.1f}s)")


# ---------------------------------------------------------------------------
# the shared six-horizon sweep (slowest section, deliberately last)

@pytest.fixture(scope="module")
def desk_sweep():
    """Sixty days, three channels: DLinear and seasonal-naive over all horizons."""
    series = synth.make_building("bldg-desk", n_days=60, n_channels=3, seed=7,
                                 noise=0.05, trend=1.0)
    dataset = preprocess.run_pipeline(series)
    t0 = time.perf_counter()
    dlinear = evaluate_sweep(dataset, dlinear_factory(TrainConfig(seed=3)),
                             HORIZONS, model_id="dlinear")
    snaive = evaluate_sweep(dataset, snaive_factory(), HORIZONS, model_id="snaive")
    wall = time.perf_counter() - t0
    return SimpleNamespace(dataset=dataset, dlinear=dlinear, snaive=snaive, wall=wall)


@criterion("baseline-beating at desk scale (six-horizon mean SMAPE)")
def test_criterion_07_baseline_beating(desk_sweep):
    dl_mean = desk_sweep.dlinear.aggregate["smape_mean"]
    sn_mean = desk_sweep.snaive.aggregate["smape_mean"]
    assert dl_mean < sn_mean, f"dlinear {dl_mean:.4f} vs snaive {sn_mean:.4f}"
    # the learner wins per-horizon too on this fixture, not just on average
    for row_dl, row_sn, h in zip(desk_sweep.dlinear.per_horizon,
                                 desk_sweep.snaive.per_horizon, HORIZONS):
        assert row_dl["smape"] < row_sn["smape"], f"horizon {h}"
    print(f"  (smape {dl_mean:.4f} vs {sn_mean:.4f}, sweep {desk_sweep.wall:.0f}s)")


@criterion("protocol-shape table cells and bitwise aggregate recompute")
def test_criterion_10_protocol_shape(desk_sweep):
    for report in (desk_sweep.dlinear, desk_sweep.snaive):
        assert report.horizons == HORIZONS
        for metric in ("mae", "mse", "smape"):
            cell = evaluation.format_cell(report.aggregate[f"{metric}_mean"],
                                          report.aggregate[f"{metric}_std"])
            assert CELL_RE.match(cell), cell
        # aggregate rows recompute bitwise from the stored per-horizon scores
        assert report.recompute_aggregate() == report.aggregate
        # ... and survive a JSON round trip (the results-store wire format)
        revived = evaluation.MetricReport.from_dict(
            json.loads(json.dumps(report.to_dict())))
        assert revived.aggregate == report.aggregate
        assert revived.per_horizon == report.per_horizon
    # a canonical mean±std cell matches the same shape
    assert CELL_RE.match("0.552±0.079")
    table = evaluation.emit_table([desk_sweep.dlinear, desk_sweep.snaive], fmt="plain")
    data_rows = [line for line in table.splitlines()[1:]
                 if line and not set(line) <= {"-", " "}]
    assert len(data_rows) == 2
    for line in data_rows:
        cells = line.split()[1:]
        assert len(cells) == 3
        for cell in cells:
            assert CELL_RE.match(cell.rstrip("*")), cell

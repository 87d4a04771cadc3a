"""Command-line entry points: fixture, train, evaluate, serve."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

from . import kernels
from .auth import CredentialsFile, write_credentials_file
from .api import ApiService
from .dlinear import HORIZONS
from .domain import BricklineError
from .engine import Engine, EngineConfig
from .evaluation import emit_table
from .store import RefreshScheduler
from .synth import make_building, write_fixture_csvs

log = logging.getLogger(__name__)


def _engine_from(path: str) -> Engine:
    return Engine.from_config(EngineConfig.from_file(path))


def _cmd_fixture(args) -> int:
    out = Path(args.out)
    series = make_building(building_id=args.building, n_days=args.days,
                           n_channels=args.channels, seed=args.seed)
    meta_path, data_path = write_fixture_csvs(series, out)
    creds_path = out / "credentials.json"
    write_credentials_file(creds_path, {args.username: args.password})
    config = {
        "store_path": str(out / "store"),
        "listen_addr": args.listen,
        "credentials_path": str(creds_path),
        "token_ttl_hours": 12,
        "refresh_period_s": 600,
        "buildings": [{"meta_csv": str(meta_path), "data_csv": str(data_path),
                       "name": args.building}],
        "preprocess": {},
        "train": {"seed": args.seed},
    }
    config_path = out / "config.json"
    config_path.write_text(json.dumps(config, indent=2, sort_keys=True) + "\n",
                           encoding="utf-8")
    print(f"wrote {meta_path}, {data_path}")
    print(f"wrote {creds_path} (user {args.username!r})")
    print(f"wrote {config_path}")
    return 0


def _cmd_train(args) -> int:
    engine = _engine_from(args.config)
    run_ids = engine.train_and_store(args.building, args.model, [args.horizon],
                                     seed=args.seed)
    for run_id in run_ids:
        run = engine.store.get_run(run_id, args.building)
        print(f"run {run_id}  status={run.status}")
        if run.metrics:
            line = "  ".join(f"{k}={run.metrics[k]:.6f}" for k in ("mae", "mse", "smape"))
            print(f"  {line}")
    return 0


def _cmd_evaluate(args) -> int:
    engine = _engine_from(args.config)
    models = [m.strip() for m in args.models.split(",") if m.strip()]
    horizons = [int(h) for h in args.horizons.split(",") if h.strip()]
    reports = engine.evaluate_models(args.building, models, horizons, seed=args.seed)
    table = emit_table(reports, fmt=args.format)
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(table)
    return 0


def _cmd_serve(args) -> int:
    config = EngineConfig.from_file(args.config)
    if not config.credentials_path:
        print("config must set credentials_path to serve", file=sys.stderr)
        return 2
    engine = Engine.from_config(config)
    credentials = CredentialsFile.load(config.credentials_path)
    service = ApiService(engine, credentials,
                         token_ttl_s=config.token_ttl_hours * 3600,
                         ui_dir=config.ui_dir)
    host, port = config.host_port()
    server = service.make_server(host, port)
    scheduler = RefreshScheduler(config.refresh_period_s, engine.refresh_forecasts).start()
    print(f"listening on http://{host}:{port} (Ctrl-C to stop)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        scheduler.stop()
        server.shutdown()
        server.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brickline",
        description="Building IoT time-series analytics: ingest, forecast, serve.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fixture", help="generate a synthetic demo building + config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--building", default="bldg-demo")
    p.add_argument("--days", type=int, default=60)
    p.add_argument("--channels", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--username", default="operator")
    p.add_argument("--password", default="brick-operator")
    p.add_argument("--listen", default="127.0.0.1:8760")
    p.set_defaults(func=_cmd_fixture)

    p = sub.add_parser("train", help="train one model for one horizon and store it")
    p.add_argument("--building", required=True)
    p.add_argument("--horizon", type=int, required=True, choices=sorted(HORIZONS))
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--model", default="dlinear", choices=["dlinear", "snaive"])
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="multi-horizon sweep; emit the metrics table")
    p.add_argument("--building", required=True)
    p.add_argument("--models", default="dlinear,snaive",
                   help="comma-separated: dlinear,snaive")
    p.add_argument("--horizons", default=",".join(str(h) for h in HORIZONS))
    p.add_argument("--format", default="plain", choices=["plain", "csv", "latex"])
    p.add_argument("--out", default=None, help="write the table here instead of stdout")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("serve", help="run the HTTP API (and UI, if configured)")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    kernels.warm_up()
    try:
        return args.func(args)
    except BricklineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

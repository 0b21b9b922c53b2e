"""Command-line interface.

Reproduces the bundled experiments and runs the verification suite.

Exit codes: 0 success, 2 configuration error, 3 verification failure,
4 numerical failure (rank/feasibility/capacity).  Failures print a
machine-readable JSON object to stdout.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import (
    BudgetExceeded,
    CapacityExceeded,
    CzreachError,
    Infeasible,
    ParseError,
    RankDeficient,
    ValidationError,
)
from .factors import fresh_ids
from .learning import monomial_basis_custom
from .oracle import boundary_cloud
from .reach import ReachConfig, ReachResult, run_lti, run_poly_data, run_poly_model
from .sets import CPZ, new_cpz, to_dict

EXPERIMENTS = ("lti-demo", "poly-model-demo", "poly-data-demo", "verify")

_BUNDLED = {
    "lti-demo": "lti_demo.json",
    "poly-model-demo": "poly_model_demo.json",
    "poly-data-demo": "poly_data_demo_small.json",
    "verify": "verify.json",
}


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ExperimentConfig:
    experiment: str
    seed: int = 0
    horizon: int = 1
    batch_length: int = 1
    reduction_order: int | None = None
    system: dict = field(default_factory=dict)
    initial_set: dict = field(default_factory=dict)
    input_set: dict = field(default_factory=dict)
    noise_set: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    projections: list = field(default_factory=list)
    cloud_samples: int = 1500

    def to_dict(self) -> dict:
        out = asdict(self)
        out["schema_version"] = 1
        return out


def _require(data: dict, key: str, kind, path: str):
    if key not in data or data[key] is None:
        raise ValidationError(f"{path}{key}: missing")
    value = data[key]
    if kind is dict and not isinstance(value, dict):
        raise ValidationError(f"{path}{key}: expected an object")
    if kind is list and not isinstance(value, list):
        raise ValidationError(f"{path}{key}: expected an array")
    if kind is int and not isinstance(value, int):
        raise ValidationError(f"{path}{key}: expected an integer")
    return value


def _check_set_spec(spec: dict, name: str) -> None:
    _require(spec, "c", list, f"{name}.")
    if "G" in spec and spec["G"]:
        width = len(spec["G"][0]) if spec["G"] else 0
        if any(len(row) != width for row in spec["G"]):
            raise ValidationError(f"{name}.G: ragged matrix")


def parse_config(path) -> ExperimentConfig:
    """Load and validate a JSON experiment configuration."""
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return config_from_dict(raw)


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ValidationError("config: expected a JSON object")
    version = raw.get("schema_version", 1)
    if version != 1:
        raise ValidationError(f"schema_version: unsupported value {version}")
    experiment = _require(raw, "experiment", str, "")
    if experiment not in EXPERIMENTS:
        raise ValidationError(f"experiment: unknown name {experiment!r}")
    cfg = ExperimentConfig(
        experiment=experiment,
        seed=int(raw.get("seed", 0)),
        horizon=int(raw.get("horizon", 1)),
        batch_length=int(raw.get("batch_length", 1)),
        reduction_order=raw.get("reduction_order"),
        system=raw.get("system", {}),
        initial_set=raw.get("initial_set", {}),
        input_set=raw.get("input_set", {}),
        noise_set=raw.get("noise_set", {}),
        data=raw.get("data", {}),
        projections=raw.get("projections", []),
        cloud_samples=int(raw.get("cloud_samples", 1500)),
    )
    if experiment == "verify":
        return cfg
    system = _require(raw, "system", dict, "")
    kind = _require(system, "type", str, "system.")
    if kind == "lti":
        _require(system, "Phi", list, "system.")
        _require(system, "Gamma", list, "system.")
    elif kind == "polynomial":
        _require(system, "Theta", list, "system.")
        _require(system, "basis", list, "system.")
    else:
        raise ValidationError(f"system.type: unknown value {kind!r}")
    for name in ("initial_set", "input_set", "noise_set"):
        spec = _require(raw, name, dict, "")
        _check_set_spec(spec, name)
    if cfg.horizon < 1:
        raise ValidationError("horizon: must be at least 1")
    if experiment in ("lti-demo", "poly-data-demo"):
        _require(raw, "data", dict, "")
        _require(raw["data"], "offline_transitions", int, "data.")
    return cfg


def load_bundled_config(experiment: str) -> ExperimentConfig:
    name = _BUNDLED.get(experiment)
    if name is None:
        raise ValidationError(f"experiment: unknown name {experiment!r}")
    text = resources.files("czreach").joinpath("configs").joinpath(name).read_text()
    return config_from_dict(json.loads(text))


def _materialize_set(spec: dict) -> CPZ:
    c = np.asarray(spec["c"], dtype=float)
    G = np.asarray(spec.get("G", []), dtype=float)
    if G.size == 0:
        G = np.zeros((c.shape[0], 0))
    h = G.shape[1]
    E = spec.get("E")
    if E is None:
        E = np.eye(h, dtype=np.int64)
        p = h
    else:
        E = np.asarray(E, dtype=np.int64)
        p = E.shape[0]
    return new_cpz(c, G, E, spec.get("A"), spec.get("b"), spec.get("R"), fresh_ids(p))


# ---------------------------------------------------------------------------
# artifact writers


def _json_dump(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")


def _write_sets_json(path: Path, result: ReachResult, seed: int) -> None:
    payload = result.to_json_dict(seed)
    for row in payload["stats"]:
        row.pop("millis", None)  # timing lives in stats.csv; sets.json stays seed-deterministic
    _json_dump(path, payload)


def _write_model_history(path: Path, result: ReachResult, seed: int) -> None:
    models = [
        {"provenance": list(m.provenance), "set": to_dict(m.set)}
        for m in result.model_history
    ]
    _json_dump(path, {"schema_version": 1, "rng": "numpy-pcg64", "seed": seed, "models": models})


def _write_stats_csv(path: Path, result: ReachResult, seed: int) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "generators", "constraints", "factors", "millis", "seed"])
        for row in result.stats:
            writer.writerow(
                [row["step"], row["generators"], row["constraints"], row["factors"], f"{row['millis']:.3f}", seed]
            )


_PALETTE = ("#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d")


def _write_cloud_csv(path: Path, clouds: list[tuple[int, np.ndarray]]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "x", "y"])
        for step, pts in clouds:
            for x, y in pts:
                writer.writerow([step, repr(float(x)), repr(float(y))])


def _write_cloud_svg(path: Path, clouds: list[tuple[int, np.ndarray]], seed: int, label: tuple[str, str]) -> None:
    # static scatter; pure post-processing of the point clouds
    all_pts = np.vstack([pts for _, pts in clouds if len(pts)]) if clouds else np.zeros((0, 2))
    if len(all_pts) == 0:
        lo, hi = np.zeros(2), np.ones(2)
    else:
        lo, hi = all_pts.min(axis=0), all_pts.max(axis=0)
    span = np.maximum(hi - lo, 1e-12)
    width, height, margin = 640.0, 480.0, 40.0

    def sx(x):
        return margin + (x - lo[0]) / span[0] * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - lo[1]) / span[1] * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0f}" height="{height:.0f}">',
        f"<!-- point-cloud projection; seed={seed}; approximate rendering only -->",
        f'<rect width="100%" height="100%" fill="white"/>',
        f'<text x="{width / 2:.0f}" y="{height - 8:.0f}" text-anchor="middle" font-size="12">{label[0]}</text>',
        f'<text x="14" y="{height / 2:.0f}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {height / 2:.0f})">{label[1]}</text>',
    ]
    for step, pts in clouds:
        color = _PALETTE[step % len(_PALETTE)]
        for x, y in pts:
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="1.2" fill="{color}" fill-opacity="0.5"/>')
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")


def _write_projections(out: Path, result: ReachResult, dims_list, samples: int, seed: int) -> None:
    proj_dir = out / "projections"
    proj_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed + 90_000)
    for dims in dims_list:
        d0, d1 = int(dims[0]), int(dims[1])
        clouds = []
        for step, S in enumerate(result.sets):
            pts = boundary_cloud(S, (d0, d1), max(100, samples), rng)
            clouds.append((step, pts))
        stem = f"proj_x{d0 + 1}_x{d1 + 1}"
        _write_cloud_csv(proj_dir / f"{stem}.csv", clouds)
        _write_cloud_svg(proj_dir / f"{stem}.svg", clouds, seed, (f"x{d0 + 1}", f"x{d1 + 1}"))


# ---------------------------------------------------------------------------
# experiment drivers


def _run_reach_experiment(cfg: ExperimentConfig, out: Path) -> None:
    from . import experiments as ex

    seed = cfg.seed
    rng = np.random.default_rng(seed)
    initial = _materialize_set(cfg.initial_set)
    input_set = _materialize_set(cfg.input_set)
    noise_set = _materialize_set(cfg.noise_set)
    reach_cfg = ReachConfig(
        initial_set=initial,
        input_set=input_set,
        noise_set=noise_set,
        horizon=cfg.horizon,
        batch_length=cfg.batch_length,
        reduction_order=cfg.reduction_order,
        seed=seed,
    )
    system = cfg.system
    if system["type"] == "lti":
        Phi = np.asarray(system["Phi"], dtype=float)
        Gamma = np.asarray(system["Gamma"], dtype=float)
        if cfg.data.get("trajectories_csv"):
            from .learning import build_batch, load_trajectories_csv

            offline_batch = build_batch(load_trajectories_csv(cfg.data["trajectories_csv"]))
        else:
            offline_batch = ex.generate_lti_data(
                Phi,
                Gamma,
                input_set,
                noise_set,
                int(cfg.data["offline_transitions"]),
                rng,
                trajectory_length=cfg.data.get("trajectory_length"),
                x0_low=cfg.data.get("x0_low"),
                x0_high=cfg.data.get("x0_high"),
            ).batch
        online = None
        n_online = int(cfg.data.get("online_transitions", 0))
        if n_online:
            extra = ex.generate_lti_data(
                Phi,
                Gamma,
                input_set,
                noise_set,
                n_online,
                rng,
                trajectory_length=cfg.data.get("trajectory_length"),
                x0_low=cfg.data.get("x0_low"),
                x0_high=cfg.data.get("x0_high"),
            )
            deliver = int(cfg.data.get("deliver_at_step", 0))
            online = [[] for _ in range(deliver + 1)]
            online[deliver] = extra.transitions
        result = run_lti(reach_cfg, offline_batch, online=online)
        dims = cfg.projections or [[0, 1], [2, 3], [3, 4]]
    else:
        Theta = np.asarray(system["Theta"], dtype=float)
        basis = monomial_basis_custom(system["basis"])
        if cfg.experiment == "poly-model-demo":
            result = run_poly_model(reach_cfg, Theta, basis)
        else:
            if cfg.data.get("trajectories_csv"):
                from .learning import DataBatch, build_batch, load_trajectories_csv

                batch = build_batch(load_trajectories_csv(cfg.data["trajectories_csv"]))
                offline = ex.RecordedData(batch, [], [], [])
            else:
                offline = ex.generate_poly_data(
                    Theta,
                    basis,
                    input_set,
                    noise_set,
                    int(cfg.data["offline_transitions"]),
                    rng,
                    trajectory_length=int(cfg.data.get("trajectory_length", 7)),
                    x0_low=cfg.data.get("x0_low", (0.9, 1.4)),
                    x0_high=cfg.data.get("x0_high", (1.1, 1.8)),
                )
            online = None
            n_online = int(cfg.data.get("online_transitions", 0))
            if n_online:
                extra = ex.generate_poly_data(
                    Theta,
                    basis,
                    input_set,
                    noise_set,
                    n_online,
                    rng,
                    trajectory_length=int(cfg.data.get("trajectory_length", 7)),
                    x0_low=cfg.data.get("x0_low", (0.9, 1.4)),
                    x0_high=cfg.data.get("x0_high", (1.1, 1.8)),
                )
                deliver = int(cfg.data.get("deliver_at_step", 0))
                online = [[] for _ in range(deliver + 1)]
                online[deliver] = extra.transitions
            result = run_poly_data(reach_cfg, offline.batch, basis, online=online)
        dims = cfg.projections or [[0, 1]]

    out.mkdir(parents=True, exist_ok=True)
    _write_sets_json(out / "sets.json", result, seed)
    _write_model_history(out / "model_history.json", result, seed)
    _write_stats_csv(out / "stats.csv", result, seed)
    _write_projections(out, result, dims, cfg.cloud_samples, seed)


def _run_verify(cfg: ExperimentConfig, out: Path) -> int:
    from .verification import format_report, run_all

    results = run_all()
    report = format_report(results)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(report)
    sys.stdout.write(report)
    return 0 if all(r.passed for r in results) else 3


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="czreach", description="exact set-based reachability experiments")
    parser.add_argument("--experiment", choices=EXPERIMENTS, help="bundled experiment name")
    parser.add_argument("--config", help="path to a JSON experiment configuration")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("--reduce", type=int, dest="reduce_order", help="enable order reduction at this size")
    parser.add_argument("--out", default="czreach-out", help="output directory")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            cfg = parse_config(args.config)
        elif args.experiment:
            cfg = load_bundled_config(args.experiment)
        else:
            raise ValidationError("experiment: provide --experiment or --config")
        if args.experiment and cfg.experiment != args.experiment and args.config:
            raise ValidationError(f"experiment: config declares {cfg.experiment!r}, flag says {args.experiment!r}")
        if args.seed is not None:
            cfg.seed = args.seed
        if args.reduce_order is not None:
            cfg.reduction_order = args.reduce_order
        out = Path(args.out)
        if cfg.experiment == "verify":
            return _run_verify(cfg, out)
        _run_reach_experiment(cfg, out)
        return 0
    except (ParseError, ValidationError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 2
    except (RankDeficient, Infeasible, CapacityExceeded, BudgetExceeded) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 4
    except CzreachError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 4


if __name__ == "__main__":
    sys.exit(main())

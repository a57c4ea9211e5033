"""Command-line front end.

Every subcommand reads one flat JSON config, builds the model instance and
emits a report as a text table (default), CSV or JSON.  Exit status is 0 on
success, 2 for invalid input and 3 when two independent computations disagree.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .config import tolerances
from .dilation import Perturbation, build_general_dilation, compute_perp, verify_dilation
from .distinguish import classify
from .dynamics import evolve_check, exact_bell, sample_bell
from .errors import DilationLabError, InternalInconsistency, ValidationError
from .numerics import general_eig2, herm_eig, max_abs
from .pictures import GenuineAngles, Picture, all_pictures
from .pt_model import LocalState, PTParams
from .spectra import SpectralData, spectral_data

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INCONSISTENT = 3

SWEEP_VARIABLES = ("alpha", "a", "b", "c", "d", "state-angle")
DEFAULT_TIMES = (0.1, 0.5, 1.0, 2.0, 5.0)
CSV_FORMAT = ".12g"
U64_MAX = 2**64 - 1

_KNOWN_KEYS = {
    "E0", "s", "alpha", "a", "b", "c", "d",
    "u", "v", "alpha_state", "Delta", "delta", "Delta_prime",
    "sweep_variable", "sweep_start", "sweep_stop", "sweep_steps",
    "seed", "times", "n", "shards", "trials",
}  # fmt: skip


@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ValidationError(f"unknown sweep variable {self.variable!r}; expected one of {', '.join(SWEEP_VARIABLES)}")
        if self.steps < 2:
            raise ValidationError("sweep_steps must be >= 2")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ValidationError("sweep bounds must be finite")

    def points(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class RunConfig:
    params: PTParams
    pert: Perturbation = Perturbation()
    state: LocalState = field(default_factory=lambda: LocalState(1.0, 0.0))
    angles: GenuineAngles = GenuineAngles()
    sweep: Sweep | None = None
    seed: int | None = None
    times: tuple[float, ...] = DEFAULT_TIMES
    n: int = 10_000
    shards: int = 1
    trials: int = 50

    def bases(self):
        return self.angles.bases()

    def with_sweep_value(self, x: float) -> "RunConfig":
        var = self.sweep.variable
        if var == "alpha":
            return replace(self, params=replace(self.params, alpha=x))
        if var in ("a", "b", "c", "d"):
            return replace(self, pert=replace(self.pert, **{var: x}))
        angles = replace(self.angles, alpha_state=x)
        return replace(self, angles=angles, state=angles.state())


def _number(raw: dict, key: str, default: float | None = None) -> float:
    if key not in raw:
        if default is None:
            raise ValidationError(f"missing required key {key!r}")
        return default
    val = raw[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ValidationError(f"{key} must be a number, got {val!r}")
    val = float(val)
    if not math.isfinite(val):
        raise ValidationError(f"{key} must be finite")
    return val


def _integer(raw: dict, key: str, default: int | None) -> int | None:
    if key not in raw:
        return default
    val = raw[key]
    if isinstance(val, bool) or not isinstance(val, int):
        raise ValidationError(f"{key} must be an integer, got {val!r}")
    return val


def _complex(raw: dict, key: str) -> complex:
    val = raw[key]
    if isinstance(val, list) and len(val) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in val):
        return complex(val[0], val[1])
    if isinstance(val, (int, float)) and not isinstance(val, bool):
        return complex(val)
    raise ValidationError(f"{key} must be a number or a [re, im] pair, got {val!r}")


def _seed(val) -> int:
    if isinstance(val, bool) or not isinstance(val, int) or not 0 <= val <= U64_MAX:
        raise ValidationError(f"seed must be an unsigned 64-bit integer, got {val!r}")
    return val


def parse_config(raw: dict) -> RunConfig:
    """Validate a flat config mapping and build a :class:`RunConfig`."""
    if not isinstance(raw, dict):
        raise ValidationError("config must be a JSON object")
    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        raise ValidationError(f"unknown config keys: {', '.join(unknown)}")

    params = PTParams(_number(raw, "E0"), _number(raw, "s"), _number(raw, "alpha")).validate()
    pert = Perturbation(*(_number(raw, k, 0.0) for k in ("a", "b", "c", "d")))
    angles = GenuineAngles(
        delta=_number(raw, "delta", 0.0),
        Delta=_number(raw, "Delta", 0.0),
        Delta_prime=_number(raw, "Delta_prime", 0.0),
        alpha_state=_number(raw, "alpha_state", 0.0),
    )
    if "u" in raw or "v" in raw:
        if "u" not in raw or "v" not in raw:
            raise ValidationError("u and v must be given together")
        if "alpha_state" in raw or "Delta" in raw:
            raise ValidationError("give the local state either as u, v or as alpha_state, Delta")
        state = LocalState(_complex(raw, "u"), _complex(raw, "v"))
    else:
        state = angles.state()

    sweep = None
    sweep_keys = [k for k in ("sweep_variable", "sweep_start", "sweep_stop", "sweep_steps") if k in raw]
    if sweep_keys:
        if len(sweep_keys) != 4:
            raise ValidationError("sweep needs sweep_variable, sweep_start, sweep_stop and sweep_steps")
        if not isinstance(raw["sweep_variable"], str):
            raise ValidationError("sweep_variable must be a string")
        sweep = Sweep(raw["sweep_variable"], _number(raw, "sweep_start"), _number(raw, "sweep_stop"), _integer(raw, "sweep_steps", None))

    times = DEFAULT_TIMES
    if "times" in raw:
        if not isinstance(raw["times"], list) or not raw["times"]:
            raise ValidationError("times must be a non-empty list")
        times = tuple(_number({"t": t}, "t") for t in raw["times"])

    n = _integer(raw, "n", 10_000)
    shards = _integer(raw, "shards", 1)
    trials = _integer(raw, "trials", 50)
    if n < 1:
        raise ValidationError("n must be >= 1")
    if not 1 <= shards <= n:
        raise ValidationError("shards must be between 1 and n")
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    seed = _seed(raw["seed"]) if "seed" in raw else None
    return RunConfig(params, pert, state, angles, sweep, seed, times, n, shards, trials)


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from exc
    return parse_config(raw)


# ---------------------------------------------------------------------------
# reports


@dataclass
class Report:
    """Tabular rows plus scalar metadata; ``status`` becomes the exit code."""

    fields: list[str]
    rows: list[dict]
    meta: dict = field(default_factory=dict)
    status: int = EXIT_OK


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (float, np.floating)):
        return format(float(x), CSV_FORMAT)
    return str(x)


def render_csv(report: Report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(report.fields)
    for row in report.rows:
        w.writerow([_fmt(row[k]) for k in report.fields])
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def render_json(report: Report) -> str:
    return json.dumps(_jsonable({"meta": report.meta, "rows": report.rows}), indent=2) + "\n"


def render_text(report: Report) -> str:
    lines = [f"{k}: {_fmt(v)}" for k, v in report.meta.items()]
    if report.rows:
        cells = [report.fields] + [[_fmt(r[k]) for k in report.fields] for r in report.rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(report.fields))]
        if lines:
            lines.append("")
        for row in cells:
            lines.append("  ".join(c.rjust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def _matrix_rows(name: str, m: np.ndarray) -> list[dict]:
    return [
        {"block": name, "row": i, "col": j, "re": float(m[i, j].real), "im": float(m[i, j].imag)}
        for i in range(m.shape[0])
        for j in range(m.shape[1])
    ]


def cmd_dilate(cfg: RunConfig) -> Report:
    d = build_general_dilation(cfg.params, cfg.pert)
    perp = compute_perp(d).matrix
    res = verify_dilation(d, trials=cfg.trials, seed=cfg.seed or 0)
    tol = tolerances()
    rows = []
    for name, m in (("H1", d.H1), ("H2", d.H2), ("H4", d.H4), ("Hperp", perp)):
        rows += _matrix_rows(name, m)
    ok = res.max_block_residual <= tol.dual_path * 10 and res.hermiticity <= tol.hermiticity
    meta = {
        "kind": d.kind.value,
        "forward_residual": res.eq_forward,
        "perp_residual": res.eq_perp,
        "hermiticity_residual": res.hermiticity,
        "h4_hermiticity_residual": res.h4_hermiticity,
        "perp_equals_h": max_abs(perp - d.H) <= tol.hermiticity,
        "h4_equals_h1": max_abs(d.H4 - d.H1) <= tol.hermiticity,
        "invariants_ok": ok,
    }
    return Report(["block", "row", "col", "re", "im"], rows, meta, EXIT_OK if ok else EXIT_INCONSISTENT)


def cmd_spectrum(cfg: RunConfig) -> Report:
    sd = spectral_data(cfg.params, cfg.pert)
    d = build_general_dilation(cfg.params, cfg.pert)
    dil = [float(x) for x in herm_eig(d.assembled).eigenvalues]
    perp = sorted(general_eig2(compute_perp(d).matrix), key=lambda z: z.real)
    rows = [{"quantity": k, "value": v} for k, v in sd.as_dict().items()]
    meta = {
        "dilation_eigenvalues": dil,
        "perp_eigenvalues_numeric": [[z.real, z.imag] for z in perp],
    }
    return Report(["quantity", "value"], rows, meta)


BELL_FIELDS = ["picture", "value", "constant", "shift", "deviation", "bound"]


def cmd_bell(cfg: RunConfig) -> Report:
    basis, basis_p = cfg.bases()
    results = all_pictures(cfg.params, cfg.pert, cfg.state, basis, basis_p)
    return Report(list(BELL_FIELDS), [r.row() for r in results])


def cmd_distinguish(cfg: RunConfig) -> Report:
    rep = classify(cfg.params, cfg.pert)
    return Report([], [], rep.as_dict())


def scan_fields() -> list[str]:
    out = ["index", "sweep_value", *SpectralData.FIELDS, "omega_gap"]
    for pic in Picture:
        out += [f"{pic.value}_value", f"{pic.value}_bound"]
    return out


def cmd_scan(cfg: RunConfig) -> Report:
    if cfg.sweep is None:
        raise ValidationError("scan needs sweep_variable, sweep_start, sweep_stop and sweep_steps")
    rows = []
    for k, x in enumerate(cfg.sweep.points()):
        point = cfg.with_sweep_value(float(x))
        point.params.validate()
        sd = spectral_data(point.params, point.pert)
        row = {"index": k, "sweep_value": float(x), **sd.as_dict(), "omega_gap": sd.omega0_p - sd.omega0_pp}
        basis, basis_p = point.bases()
        for r in all_pictures(point.params, point.pert, point.state, basis, basis_p):
            row[f"{r.picture.value}_value"] = r.value
            row[f"{r.picture.value}_bound"] = r.bound
        rows.append(row)
    return Report(scan_fields(), rows, {"sweep_variable": cfg.sweep.variable, "steps": cfg.sweep.steps})


def cmd_evolve(cfg: RunConfig) -> Report:
    rep = evolve_check(cfg.params, cfg.pert, cfg.state.plus, cfg.times)
    rows = [
        {"t": t, "residual": r, "norm_ratio": q, "fidelity": f}
        for t, r, q, f in zip(rep.times, rep.postselect_residuals, rep.norm_ratios, rep.fidelities)
    ]
    ok = rep.max_residual <= tolerances().dual_path
    meta = {"max_residual": rep.max_residual, "invariants_ok": ok}
    return Report(["t", "residual", "norm_ratio", "fidelity"], rows, meta, EXIT_OK if ok else EXIT_INCONSISTENT)


def cmd_sample(cfg: RunConfig) -> Report:
    if cfg.seed is None:
        raise ValidationError("sample needs an explicit seed (config key 'seed' or --seed)")
    est = sample_bell(cfg.params, cfg.pert, cfg.state, cfg.n, cfg.seed, shards=cfg.shards)
    exact = exact_bell(cfg.params, cfg.pert, cfg.state)
    row = {
        "mean": est.mean,
        "stderr": est.stderr,
        "exact": exact,
        "z": (est.mean - exact) / est.stderr if est.stderr > 0 else 0.0,
        "n": est.n,
        "seed": est.seed,
        "shards": est.shards,
    }
    return Report(list(row), [row])


COMMANDS = {
    "dilate": cmd_dilate,
    "spectrum": cmd_spectrum,
    "bell": cmd_bell,
    "distinguish": cmd_distinguish,
    "scan": cmd_scan,
    "evolve": cmd_evolve,
    "sample": cmd_sample,
}

HELP = {
    "dilate": "print the dilation blocks and their residuals",
    "spectrum": "closed-form and numeric spectra",
    "bell": "Bell value in every correlation picture",
    "distinguish": "can the dilation be told apart from local-Hermitian models",
    "scan": "sweep one variable and tabulate spectra and Bell values",
    "evolve": "check post-selected evolution against exp(-itH)",
    "sample": "Monte Carlo estimate of the simulation Bell value",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dilation-lab", description="Hermitian dilations of PT-symmetric qubits.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=HELP[name])
        sp.add_argument("--config", required=True, help="flat JSON config file")
        sp.add_argument("--output", help="write the report here instead of stdout")
        sp.add_argument("--format", choices=("csv", "json"), help="machine-readable output (default: text table)")
        sp.add_argument("--seed", type=int, help="RNG seed; overrides the config value")
    return parser


RENDERERS = {"csv": render_csv, "json": render_json, None: render_text}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = replace(cfg, seed=_seed(args.seed))
        report = COMMANDS[args.command](cfg)
        text = RENDERERS[args.format](report)
        if args.output:
            with open(args.output, "w", newline="") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        if report.status == EXIT_INCONSISTENT:
            print("error: invariants failed; see report", file=sys.stderr)
        return report.status
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except InternalInconsistency as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT
    except DilationLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT


if __name__ == "__main__":
    sys.exit(main())

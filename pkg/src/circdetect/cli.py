"""Command-line entry point: ``circdetect <subcommand> [--config FILE] [--key value ...]``.

Subcommands: simulate, filter, detect, roc, track, oracle-compare.

Configuration comes from built-in defaults, then a flat TOML file
(``--config``), then ``--key value`` overrides. Unknown keys are rejected.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O or input-data error. ``CIRCDETECT_OUTPUT_DIR`` sets the default
output directory.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .config import Hypothesis, Scenario, ScenarioConfig
from .detector import Estimator, run_ec_detector
from .ekf import run_ekf, write_ekf_trace_csv
from .errors import BatchFailure, ConfigurationError, DataError, NumericalFailure, UsageError
from .harness import (TrialBatchSpec, run_batch, sweep_roc, tracking_rmse, write_manifest,
                      write_roc_csv, write_tracking_csv, write_trials_csv)
from .lattice import run_lattice_filter, write_lattice_trace_csv
from .moments import run_filter, write_trace_csv
from .particle import pf_run
from .records import read_csv, write_csv
from .sdesim import MeasurementPath, simulate, write_path_csv

logger = logging.getLogger("circdetect")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    """Scenario parameters plus experiment plumbing.

    ``w0 = None`` means the default for the scenario (0 for I, 0.012
    otherwise). ``snr``, when given, overrides ``sigma0`` through
    ``sigma0 = dt / snr**2``; ``roc`` sweeps every listed value, the other
    subcommands use the first.
    """

    scenario: str = "II"
    q_theta: float = 0.1
    q_w: float = 1e-8
    w0: float | None = None
    w0_unit: str = "rad/s"
    sigma0: float = 10.0
    snr: tuple = ()
    dt: float = 0.1
    steps: int = 10_000
    n_harmonics: int = 12
    m_powers: int = 4
    seed: int = 0
    hypothesis: str = "H1"
    estimator: tuple = ("EC",)
    n_trials_h0: int = 500
    n_trials_h1: int = 500
    n_runs: int = 100
    burn_in: float = 0.2
    output_dir: str = "out"
    workers: int = 1
    oracle: bool = False
    np: int = 10_000
    propagator: str = "euler"
    clip: bool = False
    input: str | None = None

    def scenario_config(self, snr: float | None = None) -> ScenarioConfig:
        """Resolved :class:`ScenarioConfig` (optionally at a specific SNR)."""
        scenario = Scenario.parse(self.scenario)
        w0 = self.w0
        if w0 is None:
            w0 = 0.0 if scenario is Scenario.I else 0.012
        if self.w0_unit == "hz":
            w0 = 2 * math.pi * w0
        cfg = ScenarioConfig(scenario=scenario, q_theta=self.q_theta, q_w=self.q_w, w0=w0,
                             sigma0=self.sigma0, dt=self.dt, steps=self.steps,
                             n_harmonics=self.n_harmonics, m_powers=self.m_powers,
                             seed=self.seed)
        if snr is None and self.snr:
            snr = self.snr[0]
        return cfg.with_snr(snr) if snr is not None else cfg

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["snr"] = list(self.snr)
        d["estimator"] = list(self.estimator)
        return d


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _as_list(value):
    if isinstance(value, (list, tuple)):
        return list(value)
    if isinstance(value, str):
        return [v for v in (p.strip() for p in value.split(",")) if v]
    return [value]


def _as_bool(name, value):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"{name} must be a boolean (got {value!r})")


def _coerce(name, value):
    try:
        if name in ("q_theta", "q_w", "sigma0", "dt", "burn_in"):
            return float(value)
        if name == "w0":
            return None if value is None else float(value)
        if name in ("steps", "n_harmonics", "m_powers", "seed", "n_trials_h0", "n_trials_h1",
                    "n_runs", "workers", "np"):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(float(value)) if isinstance(value, str) and "e" in value.lower() else int(value)
        if name == "snr":
            return tuple(float(v) for v in _as_list(value))
        if name == "estimator":
            return tuple(Estimator.parse(v).value for v in _as_list(value))
        if name in ("oracle", "clip"):
            return _as_bool(name, value)
        if name == "w0_unit":
            unit = str(value).strip().lower().replace(" ", "")
            unit = {"rad/s": "rad/s", "rad": "rad/s", "hz": "hz"}.get(unit)
            if unit is None:
                raise ConfigurationError(f"w0_unit must be 'rad/s' or 'hz' (got {value!r})")
            return unit
        if name == "hypothesis":
            return Hypothesis.parse(value).value
        if name == "scenario":
            return Scenario.parse(value).value
        if name == "propagator":
            if value not in ("euler", "exact"):
                raise ConfigurationError(f"propagator must be 'euler' or 'exact' (got {value!r})")
            return value
        return None if value is None else str(value)
    except (TypeError, ValueError) as err:
        if isinstance(err, ConfigurationError):
            raise
        raise ConfigurationError(f"{name}: cannot interpret {value!r}") from None


def _validate(exp: ExperimentConfig):
    exp.scenario_config()
    for snr in exp.snr:
        if not (snr > 0 and math.isfinite(snr)):
            raise ConfigurationError(f"snr must satisfy snr > 0 (got {snr})")
    for name in ("n_trials_h0", "n_trials_h1", "n_runs", "workers"):
        if getattr(exp, name) < 1:
            raise ConfigurationError(f"{name} must satisfy {name} >= 1")
    if exp.np < 1000:
        raise ConfigurationError(f"np must satisfy np >= 1000 (got {exp.np})")
    if not 0 <= exp.burn_in < 1:
        raise ConfigurationError(f"burn_in must satisfy 0 <= burn_in < 1 (got {exp.burn_in})")


def parse_config(path=None, overrides=None) -> ExperimentConfig:
    """Defaults, then the flat TOML file at ``path``, then ``overrides``."""
    values = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                doc = tomllib.load(fh)
        except tomllib.TOMLDecodeError as err:
            raise ConfigurationError(f"{path}: parse error: {err}") from None
        for key, value in doc.items():
            if isinstance(value, dict):
                raise ConfigurationError(f"{path}: nested table [{key}] not allowed; use flat keys")
            values[key] = value
    for key, value in (overrides or {}).items():
        values[key.replace("-", "_")] = value
    if "output_dir" not in values and os.environ.get("CIRCDETECT_OUTPUT_DIR"):
        values["output_dir"] = os.environ["CIRCDETECT_OUTPUT_DIR"]
    unknown = sorted(set(values) - set(_FIELDS))
    if unknown:
        raise ConfigurationError(f"unknown configuration key(s): {', '.join(unknown)}")
    exp = ExperimentConfig(**{k: _coerce(k, v) for k, v in values.items()})
    _validate(exp)
    return exp


def _meta(exp, cfg, **extra):
    meta = {"experiment": exp.to_dict(), "config": cfg.to_dict()}
    meta.update(extra)
    return meta


def _outdir(exp) -> Path:
    out = Path(exp.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_or_simulate(exp, cfg):
    if exp.input:
        meta, cols = read_csv(exp.input)
        if not np.isclose(np.diff(cols["t"][:2]).item() if cols["t"].size > 1 else cfg.dt, cfg.dt):
            raise UsageError(f"{exp.input}: sampling interval does not match dt = {cfg.dt}")
        hyp = Hypothesis.parse((meta or {}).get("hypothesis", "H1"))
        return None, MeasurementPath(cols["dz"], cfg.dt, hyp), cols
    signal, meas = simulate(cfg, exp.hypothesis)
    return signal, meas, None


def cmd_simulate(exp):
    cfg = exp.scenario_config()
    signal, meas = simulate(cfg, exp.hypothesis)
    out = _outdir(exp) / f"path_{cfg.scenario.value}_{meas.hypothesis.value}_seed{cfg.seed}.csv"
    write_path_csv(out, signal, meas, cfg, {"experiment": exp.to_dict()})
    print(out)


def cmd_filter(exp):
    cfg = exp.scenario_config()
    _, meas, _ = _load_or_simulate(exp, cfg)
    est = Estimator.parse(exp.estimator[0])
    out = _outdir(exp) / f"trace_{cfg.scenario.value}_{est.value}_seed{cfg.seed}.csv"
    meta = {"experiment": exp.to_dict()}
    if est is Estimator.EKF:
        write_ekf_trace_csv(out, run_ekf(meas, cfg), cfg, meta)
    elif cfg.scenario is Scenario.III:
        run = run_lattice_filter(meas, cfg, clip=exp.clip, propagator=exp.propagator)
        write_lattice_trace_csv(out, run, cfg, meta)
    else:
        run = run_filter(meas, cfg, clip=exp.clip, propagator=exp.propagator)
        write_trace_csv(out, run, cfg, meta)
    print(out)


def cmd_detect(exp):
    cfg = exp.scenario_config()
    _, meas, _ = _load_or_simulate(exp, cfg)
    est = Estimator.parse(exp.estimator[0])
    loglik = run_ec_detector(meas, cfg, est, exp.propagator, exp.clip)
    out = _outdir(exp) / f"detect_{cfg.scenario.value}_{est.value}_seed{cfg.seed}.csv"
    write_csv(out, ["trial_id", "hypothesis", "estimator", "loglik"],
              [[0], [meas.hypothesis.value], [est.value], [loglik]], _meta(exp, cfg))
    print("%.17g" % loglik)


def cmd_roc(exp):
    out = _outdir(exp)
    snrs = exp.snr or (exp.scenario_config().snr,)
    for snr in snrs:
        cfg = exp.scenario_config(snr)
        for name in exp.estimator:
            spec = TrialBatchSpec(cfg, name, exp.n_trials_h0, exp.n_trials_h1, exp.seed)
            result = run_batch(spec, workers=exp.workers, propagator=exp.propagator)
            table = sweep_roc(result.h0, result.h1, cfg.snr)
            stem = f"roc_{cfg.scenario.value}_snr{snr:.4g}_{spec.estimator.value}"
            meta = _meta(exp, cfg, snr=snr, estimator=spec.estimator.value)
            write_roc_csv(out / f"{stem}.csv", table, meta)
            write_trials_csv(out / f"{stem}_trials.csv", result, meta)
            write_manifest(out / f"{stem}_manifest.json", spec, experiment=exp.to_dict(), snr=snr)
            print(f"{stem}.csv  Pd(Pf<=0.01) = {table.pd_at_pf(0.01):.3f}")


def cmd_track(exp):
    cfg = exp.scenario_config()
    reports = [tracking_rmse(cfg, name, exp.n_runs, exp.seed, exp.burn_in, exp.workers,
                             propagator=exp.propagator)
               for name in exp.estimator]
    out = _outdir(exp) / f"tracking_{cfg.scenario.value}_snr{cfg.snr:.4g}.csv"
    write_tracking_csv(out, reports, _meta(exp, cfg))
    for rep in reports:
        print(f"{rep.estimator.value}: rmse {rep.mean:.4f} +/- {rep.std:.4f}")
    print(out)


def cmd_oracle_compare(exp):
    cfg = exp.scenario_config()
    _, meas, _ = _load_or_simulate(exp, cfg)
    if cfg.scenario is Scenario.III:
        moment = run_lattice_filter(meas, cfg, clip=exp.clip, propagator=exp.propagator).signal
    else:
        moment = run_filter(meas, cfg, clip=exp.clip, propagator=exp.propagator).signal
    particle = pf_run(meas, cfg, exp.np).estimates
    k = np.arange(moment.shape[0])
    out = _outdir(exp) / f"oracle_{cfg.scenario.value}_seed{cfg.seed}.csv"
    write_csv(out, ["k", "t", "moment_re", "moment_im", "particle_re", "particle_im", "abs_diff"],
              [k, k * cfg.dt, moment.real, moment.imag, particle.real, particle.imag,
               np.abs(moment - particle)], _meta(exp, cfg))
    burn = int(math.ceil(exp.burn_in * (k.size - 1)))
    print(f"mean |moment - particle| after burn-in: {np.abs(moment - particle)[burn + 1:].mean():.4f}")
    print(out)


COMMANDS = {
    "simulate": cmd_simulate,
    "filter": cmd_filter,
    "detect": cmd_detect,
    "roc": cmd_roc,
    "track": cmd_track,
    "oracle-compare": cmd_oracle_compare,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="circdetect", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat TOML configuration file")
        p.add_argument("-v", "--verbose", action="store_true")
        for field in _FIELDS:
            flag = "--" + field.replace("_", "-")
            p.add_argument(flag, dest=field, default=None, metavar="VALUE")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {f: getattr(args, f) for f in _FIELDS if getattr(args, f) is not None}
    exp = None
    try:
        exp = parse_config(args.config, overrides)
        COMMANDS[args.command](exp)
    except (ConfigurationError, UsageError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as err:
        if err.seed is None:
            err.seed = exp.seed
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except BatchFailure as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, DataError, KeyError) as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

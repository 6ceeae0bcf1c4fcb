"""Command-line front end.

    cavion run --protocol su2-cat --n 1 --theta 0.7853981633974483 --check
    cavion emit-distribution report.json --mode joint --branch g

Exit status: 0 success, 1 failed ``--check``, 2 usage/config error,
3 numeric failure. ``CAVION_CUTOFF`` sets the default Fock cutoff.
"""
import argparse
import dataclasses
import datetime
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from cavion import kernels, protocols, targets
from cavion.core import PhysicalParams, make_space
from cavion.errors import CavionError, InvalidArgument
from cavion.targets import Variant

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
PROTOCOLS = ("su2-cat", "entangled-coherent", "squeezed-cat", "phase-gate", "validate-rwa")
REPORT_SCHEMA = 1
AMPLITUDE_FLOOR = 1e-15

# acceptance thresholds enforced by --check
DEFAULT_TOLERANCES = {
    "su2-cat": {"fidelity": 1e-9, "probability": 1e-10, "orthogonality": 1e-10},
    "entangled-coherent": {"fidelity": 1e-6, "probability": 1e-10},
    "squeezed-cat": {"fidelity": 1e-7, "probability": 1e-10, "support": 1e-12},
    "phase-gate": {"gate": 1e-9},
    "validate-rwa": {},
}
PHYSICAL_KEYS = ("nu", "delta_cA", "Delta_oA", "g0", "epsilon_A", "eta", "phi_A")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    protocol: str
    n: int = 1
    theta: float = math.pi / 4
    alpha: complex = 0.8
    beta: complex = 0.4j
    variant: str = "half-angle"
    r: float = 0.5
    cutoff_a: int | None = None
    cutoff_b: int | None = None
    omega1: float | None = None
    omega2: float | None = None
    omega3: float | None = None
    physical: dict = field(default_factory=dict)
    gate_input: list | None = None
    ratios: list = field(default_factory=lambda: [10.0, 30.0, 100.0])
    duration: float = math.pi / 4
    input_fock: list | None = None
    explore_full: bool = False
    tolerances: dict = field(default_factory=dict)
    sample: int = 0
    seed: int = 0
    output: str | None = None

    def validate(self):
        if self.protocol not in PROTOCOLS:
            raise UsageError(f"protocol must be one of {', '.join(PROTOCOLS)}; got {self.protocol!r}")
        if self.variant not in ("half-angle", "full-swap"):
            raise UsageError(f"variant must be half-angle or full-swap; got {self.variant!r}")
        unknown = set(self.physical) - set(PHYSICAL_KEYS)
        if unknown:
            raise UsageError(f"unknown physical parameters: {sorted(unknown)}")
        bad = set(self.tolerances) - set(DEFAULT_TOLERANCES[self.protocol])
        if bad:
            raise UsageError(f"unknown tolerances for {self.protocol}: {sorted(bad)}")
        if self.sample < 0:
            raise UsageError("--sample must be >= 0")

    def default_cutoff(self) -> int:
        env = os.environ.get("CAVION_CUTOFF")
        if env:
            try:
                return int(env)
            except ValueError:
                raise UsageError(f"CAVION_CUTOFF must be an integer, got {env!r}") from None
        return 12 if self.protocol == "validate-rwa" else 25

    def spec(self):
        default = self.default_cutoff()
        ca = self.cutoff_a if self.cutoff_a is not None else default
        cb = self.cutoff_b if self.cutoff_b is not None else default
        return make_space(ca, cb)

    def params(self) -> PhysicalParams:
        omegas = {"omega1": self.omega1, "omega2": self.omega2, "omega3": self.omega3}
        if not self.physical:
            return PhysicalParams.effective(**{k: (1.0 if v is None else v) for k, v in omegas.items()})
        base = dataclasses.asdict(PhysicalParams.effective())
        base.update(self.physical)
        base.update(omegas)
        return PhysicalParams(**base)

    def tolerance(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[self.protocol][name]))

    def echo(self) -> dict:
        spec = self.spec()
        out = {"protocol": self.protocol, "cutoff_a": spec.cutoff_a, "cutoff_b": spec.cutoff_b}
        if self.protocol == "su2-cat":
            out.update(n=self.n, theta=self.theta)
        elif self.protocol == "entangled-coherent":
            out.update(alpha=self.alpha, beta=self.beta, variant=self.variant)
        elif self.protocol == "squeezed-cat":
            out.update(r=self.r)
        elif self.protocol == "phase-gate":
            out.update(gate_input=self.gate_input)
        else:
            out.update(ratios=list(self.ratios), duration=self.duration, input_fock=self.input_fock,
                       alpha=self.alpha, beta=self.beta, explore_full=self.explore_full)
        if self.protocol != "validate-rwa":
            p = self.params()
            out["omega"] = {"omega1": p.Omega1, "omega2": p.Omega2, "omega3": p.Omega3}
        out["physical"] = dict(sorted(self.physical.items()))
        tol = dict(DEFAULT_TOLERANCES[self.protocol])
        tol.update(self.tolerances)
        out["tolerances"] = tol
        out["sample"] = self.sample
        out["seed"] = self.seed
        return out


# ---------------------------------------------------------------------------
# JSON with fixed layout and 17 significant digits


def _scalar(x) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return "null"
        text = format(x, ".17g")
        if not any(c in text for c in ".en"):
            text += ".0"
        return text
    if isinstance(x, str):
        return json.dumps(x, ensure_ascii=False)
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _prepare_value(x):
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, np.ndarray):
        return [_prepare_value(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): _prepare_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_prepare_value(v) for v in x]
    return x


def _is_flat(x) -> bool:
    if isinstance(x, dict):
        return len(x) <= 3 and all(not isinstance(v, (dict, list)) for v in x.values())
    if isinstance(x, list):
        return all(not isinstance(v, (dict, list)) or (isinstance(v, dict) and _is_flat(v)) for v in x)
    return True


def _encode(x, level: int) -> str:
    pad = "  " * (level + 1)
    end = "  " * level
    if isinstance(x, dict):
        if not x:
            return "{}"
        if _is_flat(x):
            return "{" + ", ".join(f"{json.dumps(k)}: {_encode(v, level + 1)}" for k, v in x.items()) + "}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, level + 1)}" for k, v in x.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(x, list):
        if not x:
            return "[]"
        if _is_flat(x):
            return "[" + ", ".join(_encode(v, level + 1) for v in x) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, level + 1) for v in x) + "\n" + end + "]"
    return _scalar(x)


def dumps_report(report: dict) -> str:
    """Serialize a report: keys in insertion order, floats with 17 significant digits."""
    return _encode(_prepare_value(report), 0) + "\n"


# ---------------------------------------------------------------------------
# protocol runners


def _branch_records(state) -> list:
    amps = state.amplitudes
    records = []
    for n_a in range(amps.shape[0]):
        for n_b in range(amps.shape[1]):
            c = amps[n_a, n_b]
            if abs(c) > AMPLITUDE_FLOOR:
                records.append([n_a, n_b, float(c.real), float(c.imag)])
    return records


def _branch_report(outcome) -> dict:
    diag = outcome.diagnostics
    return {
        "branch": outcome.branch,
        "probability": outcome.probability,
        "empty": outcome.empty,
        "target_fidelity": outcome.target_fidelity,
        "target_norm_sq": diag.get("target_norm_sq"),
        "truncation_mass": diag.get("truncation_mass"),
        "amplitudes": [] if outcome.empty else _branch_records(outcome.post_state),
    }


def _check(value, threshold, passed) -> dict:
    return {"value": value, "threshold": threshold, "pass": bool(passed)}


def _branch_checks(cfg, outcomes, extra=None) -> dict:
    checks = {}
    total = sum(o.probability for o in outcomes.values())
    tol = cfg.tolerance("probability")
    checks["probability_sum"] = _check(abs(total - 1.0), tol, abs(total - 1.0) < tol)
    tol = cfg.tolerance("fidelity")
    for name, o in outcomes.items():
        if not o.empty:
            infid = 1.0 - o.target_fidelity
            checks[f"infidelity_{name}"] = _check(infid, tol, infid <= tol)
    if extra:
        checks.update(extra)
    return checks


def _run_branches(cfg, spec):
    params = cfg.params()
    extra = {}
    if cfg.protocol == "su2-cat":
        outcomes = protocols.run_su2_cat(cfg.n, cfg.theta, spec, params)
        g, e = outcomes["g"], outcomes["e"]
        if not (g.empty or e.empty):
            cross = abs(g.post_state.vdot(e.post_state))
            tol = cfg.tolerance("orthogonality")
            extra["orthogonality"] = _check(cross, tol, cross < tol)
    elif cfg.protocol == "entangled-coherent":
        variant = Variant(cfg.variant.replace("-", "_"))
        outcomes = protocols.run_entangled_coherent(cfg.alpha, cfg.beta, variant, spec, params)
    else:
        outcomes = protocols.run_squeezed_cat(cfg.r, spec, params)
        tol = cfg.tolerance("support")
        for name, parity in (("g", 0), ("e", 1)):
            o = outcomes[name]
            if o.empty:
                continue
            probs = np.abs(o.post_state.amplitudes) ** 2
            keep = np.zeros_like(probs, dtype=bool)
            idx = np.arange(parity, min(probs.shape), 2)
            keep[idx, idx] = True
            off = float(probs[~keep].sum())
            extra[f"off_support_{name}"] = _check(off, tol, off < tol)
    results = {"branches": [_branch_report(outcomes[b]) for b in ("g", "e")]}
    samples = None
    if cfg.sample:
        p = np.array([outcomes["g"].probability, outcomes["e"].probability])
        counts = np.random.default_rng(cfg.seed).multinomial(cfg.sample, p / p.sum())
        samples = {"shots": cfg.sample, "g": int(counts[0]), "e": int(counts[1])}
    return results, _branch_checks(cfg, outcomes, extra), samples


def _run_phase_gate(cfg, spec):
    coeffs = None
    if cfg.gate_input is not None:
        coeffs = np.array([complex(c) for c in cfg.gate_input])
        if coeffs.shape != (4,) or np.linalg.norm(coeffs) == 0:
            raise UsageError("--gate-input needs 4 coefficients, not all zero")
        coeffs = coeffs / np.linalg.norm(coeffs)
    res = protocols.run_phase_gate(spec, coeffs, cfg.params())
    table = res.truth_table
    results = {
        "basis": ["|0,0>", "|0,1>", "|1,0>", "|1,1>"],
        "truth_table": table.matrix,
        "max_error": table.max_error(),
        "max_offdiag": table.max_offdiag(),
        "unitarity_error": table.unitarity_error(),
    }
    if res.state is not None:
        recs = []
        for idx, c in enumerate(res.state.amplitudes):
            if abs(c) > AMPLITUDE_FLOOR:
                n_a, n_b, s = spec.labels(idx)
                recs.append([n_a, n_b, "ge"[s], float(c.real), float(c.imag)])
        results["state"] = recs
    tol = cfg.tolerance("gate")
    checks = {
        "truth_table_error": _check(table.max_error(), tol, table.max_error() < tol),
        "offdiag_leakage": _check(table.max_offdiag(), tol, table.max_offdiag() < tol),
    }
    return results, checks, None


def _run_rwa(cfg, spec):
    bosonic = None
    if cfg.input_fock is not None:
        if len(cfg.input_fock) != 2:
            raise UsageError("--input-fock needs two occupation numbers")
        bosonic = targets.fock_pair(spec, int(cfg.input_fock[0]), int(cfg.input_fock[1]))
    fids = [protocols.validate_rwa(cfg.alpha, cfg.beta, r, cfg.duration, spec, bosonic=bosonic) for r in cfg.ratios]
    increasing = all(b > a for a, b in zip(fids, fids[1:]))
    results = {"ratios": [float(r) for r in cfg.ratios], "fidelities": fids}
    if cfg.explore_full:
        results["exploratory_full_vs_eliminated"] = [
            protocols.compare_full_model(cfg.alpha, cfg.beta, r, cfg.duration, spec, bosonic=bosonic)
            for r in cfg.ratios
        ]
    checks = {"fidelity_increasing": _check(None, None, increasing)}
    return results, checks, None


def run(cfg: RunConfig) -> tuple[dict, bool]:
    """Execute one configured protocol; returns the report and whether all checks passed."""
    cfg.validate()
    spec = cfg.spec()
    started = time.perf_counter()
    if cfg.protocol == "phase-gate":
        results, checks, samples = _run_phase_gate(cfg, spec)
    elif cfg.protocol == "validate-rwa":
        results, checks, samples = _run_rwa(cfg, spec)
    else:
        results, checks, samples = _run_branches(cfg, spec)
    wall = time.perf_counter() - started
    report = {
        "schema": REPORT_SCHEMA,
        "protocol": cfg.protocol,
        "backend": kernels.BACKEND,
        "config": cfg.echo(),
        "results": results,
        "checks": checks,
    }
    if samples is not None:
        report["samples"] = samples
    report["timestamp"] = {
        "utc": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        "wall_time_s": round(wall, 6),
    }
    return report, all(c["pass"] for c in checks.values())


# ---------------------------------------------------------------------------
# plot data


def emit_distribution(report: dict, mode: str = "joint", branch: str = "g") -> list[tuple]:
    """Rows ``(n, p)`` for ``mode`` 'a'/'b' or ``(n_a, n_b, p)`` for 'joint'.

    Branch reports use the chosen detection branch; phase-gate reports use the
    evolved input state summed over the internal state.
    """
    if mode not in ("a", "b", "joint"):
        raise UsageError(f"mode must be a, b or joint; got {mode!r}")
    results = report.get("results", {})
    joint: dict[tuple, float] = {}
    if "branches" in results:
        chosen = [b for b in results["branches"] if b["branch"] == branch]
        if not chosen or chosen[0]["empty"]:
            raise UsageError(f"report has no populated branch {branch!r}")
        for n_a, n_b, re, im in chosen[0]["amplitudes"]:
            joint[(n_a, n_b)] = joint.get((n_a, n_b), 0.0) + re * re + im * im
    elif "state" in results:
        for n_a, n_b, _s, re, im in results["state"]:
            joint[(n_a, n_b)] = joint.get((n_a, n_b), 0.0) + re * re + im * im
    else:
        raise UsageError("report carries no state amplitudes")
    if mode == "joint":
        return [(na, nb, p) for (na, nb), p in sorted(joint.items())]
    axis = 0 if mode == "a" else 1
    marginal: dict[int, float] = {}
    for key, p in joint.items():
        marginal[key[axis]] = marginal.get(key[axis], 0.0) + p
    return sorted(marginal.items())


def format_rows(rows) -> str:
    return "".join("\t".join(_scalar(v) for v in row) + "\n" for row in rows)


# ---------------------------------------------------------------------------
# argument handling


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cavion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run a protocol and write a JSON report")
    r.add_argument("--protocol", choices=PROTOCOLS)
    r.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    r.add_argument("--output", "-o", help="report path (default: stdout)")
    r.add_argument("--check", action="store_true", help="exit 1 if any acceptance threshold fails")
    r.add_argument("--n", type=int)
    r.add_argument("--theta", type=float, help="beam-splitter pulse area Omega1 t")
    r.add_argument("--alpha", type=_complex)
    r.add_argument("--beta", type=_complex)
    r.add_argument("--variant", choices=("half-angle", "full-swap"))
    r.add_argument("--r", type=float, help="squeezing pulse area Omega2 t")
    r.add_argument("--cutoff", type=int, help="Fock cutoff for both modes")
    r.add_argument("--cutoff-a", type=int)
    r.add_argument("--cutoff-b", type=int)
    for k in ("omega1", "omega2", "omega3"):
        r.add_argument(f"--{k}", type=float, help=f"override the effective {k.capitalize()}")
    r.add_argument("--nu", type=float)
    r.add_argument("--delta-ca", dest="delta_cA", type=float)
    r.add_argument("--delta-oa", dest="Delta_oA", type=float)
    r.add_argument("--g0", type=float)
    r.add_argument("--epsilon", dest="epsilon_A", type=float)
    r.add_argument("--eta", type=float)
    r.add_argument("--phi", dest="phi_A", type=float)
    r.add_argument("--gate-input", nargs=4, type=_complex, metavar="C",
                   help="input coefficients over |00>, |01>, |10>, |11> (phase-gate)")
    r.add_argument("--ratios", nargs="+", type=float, help="nu/Omega1 ladder (validate-rwa)")
    r.add_argument("--duration", type=float, help="pulse area Omega1 t (validate-rwa)")
    r.add_argument("--input-fock", nargs=2, type=int, metavar="N", help="Fock input n_a n_b (validate-rwa)")
    r.add_argument("--explore-full", action="store_true", default=None,
                   help="also report the unchecked full-model comparison (validate-rwa)")
    r.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                   help="override a check tolerance, e.g. fidelity=1e-8")
    r.add_argument("--sample", type=int, help="draw this many detection outcomes")
    r.add_argument("--seed", type=int)

    e = sub.add_parser("emit-distribution", help="print plot-ready number distributions from a report")
    e.add_argument("report")
    e.add_argument("--mode", choices=("a", "b", "joint"), default="joint")
    e.add_argument("--branch", choices=("g", "e"), default="g")
    e.add_argument("--output", "-o")
    return parser


_FLAG_FIELDS = ("protocol", "n", "theta", "alpha", "beta", "variant", "r", "cutoff_a", "cutoff_b",
                "omega1", "omega2", "omega3", "gate_input", "ratios", "duration", "input_fock",
                "explore_full", "sample", "seed", "output")


def _coerce(key, value):
    if key in ("alpha", "beta"):
        if isinstance(value, dict):
            return complex(value["re"], value["im"])
        return complex(value)
    if key == "gate_input" and value is not None:
        return [complex(v["re"], v["im"]) if isinstance(v, dict) else complex(v) for v in value]
    return value


def config_from_args(args) -> RunConfig:
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        known = {f.name for f in dataclasses.fields(RunConfig)} | {"cutoff"}
        unknown = set(data) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        if "cutoff" in data:
            c = data.pop("cutoff")
            data.setdefault("cutoff_a", c)
            data.setdefault("cutoff_b", c)
    if args.cutoff is not None:
        data["cutoff_a"] = data["cutoff_b"] = args.cutoff
    for key in _FLAG_FIELDS:
        value = getattr(args, key, None)
        if value is not None:
            data[key] = list(value) if isinstance(value, tuple) else value
    physical = dict(data.get("physical", {}))
    for key in PHYSICAL_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            physical[key] = value
    data["physical"] = physical
    tolerances = dict(data.get("tolerances", {}))
    for item in args.tol:
        name, sep, value = item.partition("=")
        try:
            tolerances[name] = float(value)
        except ValueError:
            raise UsageError(f"--tol expects NAME=VALUE, got {item!r}") from None
        if not sep:
            raise UsageError(f"--tol expects NAME=VALUE, got {item!r}")
    data["tolerances"] = tolerances
    if "protocol" not in data:
        raise UsageError("exactly one --protocol is required")
    data = {k: _coerce(k, v) for k, v in data.items()}
    try:
        return RunConfig(**data)
    except TypeError as exc:
        raise UsageError(str(exc)) from None


def _write(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "run":
            cfg = config_from_args(args)
            report, passed = run(cfg)
            _write(dumps_report(report), cfg.output)
            if args.check and not passed:
                failed = [k for k, c in report["checks"].items() if not c["pass"]]
                print(f"check failed: {', '.join(failed)}", file=sys.stderr)
                return EXIT_CHECK
            return EXIT_OK
        try:
            with open(args.report, encoding="utf-8") as fh:
                report = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read report {args.report}: {exc}") from None
        _write(format_rows(emit_distribution(report, args.mode, args.branch)), args.output)
        return EXIT_OK
    except (UsageError, InvalidArgument) as exc:
        print(f"cavion: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CavionError as exc:
        print(f"cavion: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

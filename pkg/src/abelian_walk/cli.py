"""Config-driven experiment runner.

    abelian-walk walk     --config z5.json [--out DIR] [--format csv|json]
    abelian-walk quantum  --config z5_projective.json
    abelian-walk spectrum --config hw3.json
    abelian-walk polytope --config z5.json
    abelian-walk verify   --config z5.json

``--config`` takes a path or the name of a bundled config (``z5``,
``hw3``, ``hw3_binomial``, ``z5_projective``, ``z3_povm``,
``z5_permutation``). Exit codes: 0 ok, 1 verification failed, 2 config
could not be parsed, 3 config failed validation, 4 capacity exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import birkhoff, measures, polytope, quantum
from .errors import AbelianWalkError, CapacityError, DomainError, NotErgodicError
from .group import GroupSpec

EXIT_VERIFY = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_CAPACITY = 4

SEED_ENV = "ABELIAN_WALK_SEED"
MONOTONE_SLACK = 1e-12
BRIDGE_TOL = 1e-9
DEFAULT_MAX_STEPS = 10_000
DEFAULT_POLYTOPE_STEPS = 10


class ConfigParseError(AbelianWalkError):
    pass


class ConfigValidationError(AbelianWalkError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


def fmt(x: float) -> str:
    return f"{float(x):.12g}"


# --- config -----------------------------------------------------------------

@dataclass
class QuantumBlock:
    mode: str
    d: int
    weights: np.ndarray
    steps: int
    rho0: dict
    fiducial_seed: int = 0


@dataclass
class ExperimentConfig:
    group: GroupSpec
    steps: int
    initial: Optional[np.ndarray] = None
    step_distribution: Optional[np.ndarray] = None
    transition: Optional[birkhoff.TransitionMatrix] = None
    quantum: Optional[QuantumBlock] = None
    epsilon: Optional[float] = None
    max_steps: int = DEFAULT_MAX_STEPS
    polytope_kind: str = "subgroup"
    polytope_steps: int = DEFAULT_POLYTOPE_STEPS
    query: Optional[np.ndarray] = None


def _int(value, key, minimum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigValidationError(key, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigValidationError(key, f"must be >= {minimum}, got {value}")
    return value


def _number(value, key) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigValidationError(key, f"expected a finite number, got {value!r}")
    return float(value)


def _vector(value, key, length) -> np.ndarray:
    if not isinstance(value, list):
        raise ConfigValidationError(key, f"expected a list of {length} numbers")
    if len(value) != length:
        raise ConfigValidationError(key, f"expected {length} entries, got {len(value)}")
    vals = [_number(v, f"{key}[{i}]") for i, v in enumerate(value)]
    try:
        return birkhoff.probability_vector(vals, renormalize=True)
    except DomainError as exc:
        raise ConfigValidationError(key, str(exc)) from None


def _group(raw, key="group") -> GroupSpec:
    if not isinstance(raw, dict):
        raise ConfigValidationError(key, "expected an object with 'kind' and 'd'")
    kind = raw.get("kind")
    if kind not in ("cyclic", "product"):
        raise ConfigValidationError(f"{key}.kind", f"expected 'cyclic' or 'product', got {kind!r}")
    d = _int(raw.get("d"), f"{key}.d", minimum=2)
    return GroupSpec(kind, d)


def _initial(raw, n, key="initial") -> np.ndarray:
    if raw is None:
        return birkhoff.delta(n, 0)
    if raw == "uniform":
        return birkhoff.uniform(n)
    if isinstance(raw, dict) and set(raw) == {"delta"}:
        idx = _int(raw["delta"], f"{key}.delta", minimum=0)
        if idx >= n:
            raise ConfigValidationError(f"{key}.delta", f"index {idx} out of range for {n} states")
        return birkhoff.delta(n, idx)
    return _vector(raw, key, n)


def _step_distribution(raw, spec, key="step_distribution") -> np.ndarray:
    if isinstance(raw, dict):
        if set(raw) == {"binomial"}:
            f = _number(raw["binomial"], f"{key}.binomial")
            if not 0 <= f <= 1:
                raise ConfigValidationError(f"{key}.binomial", "must lie in [0, 1]")
            return birkhoff.binomial_step(spec, f)
        if set(raw) == {"delta"}:
            idx = _int(raw["delta"], f"{key}.delta", minimum=0)
            if idx >= spec.order:
                raise ConfigValidationError(f"{key}.delta", f"index {idx} out of range")
            return birkhoff.delta(spec.order, idx)
        raise ConfigValidationError(key, "expected a list, {'binomial': f} or {'delta': index}")
    return _vector(raw, key, spec.order)


def _rho0(raw, d, key="quantum.rho0") -> dict:
    if not isinstance(raw, dict) or len(raw) != 1:
        raise ConfigValidationError(
            key, "expected one of {'basis_state': j}, {'momentum_state': j}, {'maximally_mixed': true}"
        )
    (name, value), = raw.items()
    if name in ("basis_state", "momentum_state"):
        j = _int(value, f"{key}.{name}", minimum=0)
        if j >= d:
            raise ConfigValidationError(f"{key}.{name}", f"index {j} out of range for d={d}")
        return {name: j}
    if name == "maximally_mixed" and value is True:
        return {name: True}
    raise ConfigValidationError(key, f"unsupported initial state {name!r}")


def parse_config(raw: Any) -> ExperimentConfig:
    """Validate a decoded JSON config; errors name the offending key."""
    if not isinstance(raw, dict):
        raise ConfigValidationError("<root>", "config must be a JSON object")
    known = {"group", "step_distribution", "transition_matrix", "quantum", "initial",
             "steps", "epsilon", "max_steps", "polytope", "name", "description"}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigValidationError(unknown[0], "unknown key")
    sources = [k for k in ("step_distribution", "transition_matrix", "quantum") if k in raw]
    if len(sources) != 1:
        raise ConfigValidationError(
            "<root>", "exactly one of 'step_distribution', 'transition_matrix', 'quantum' is required"
        )

    epsilon = None
    if raw.get("epsilon") is not None:
        epsilon = _number(raw["epsilon"], "epsilon")
        if epsilon <= 0:
            raise ConfigValidationError("epsilon", "must be positive")
    max_steps = _int(raw.get("max_steps", DEFAULT_MAX_STEPS), "max_steps", minimum=0)

    if "quantum" in raw:
        q = raw["quantum"]
        if not isinstance(q, dict):
            raise ConfigValidationError("quantum", "expected an object")
        mode = q.get("mode")
        if mode not in ("projective", "povm"):
            raise ConfigValidationError("quantum.mode", f"expected 'projective' or 'povm', got {mode!r}")
        d = _int(q.get("d"), "quantum.d", minimum=2)
        if mode == "povm" and (d < 3 or d % 2 == 0):
            raise ConfigValidationError("quantum.d", "POVM mode needs odd d >= 3")
        spec = GroupSpec.cyclic(d) if mode == "projective" else GroupSpec.product(d)
        if "group" in raw and _group(raw["group"]) != spec:
            raise ConfigValidationError("group", f"{mode} mode with d={d} walks on {spec}")
        weights = _vector(q.get("weights"), "quantum.weights", spec.order)
        steps = _int(q.get("steps", 0), "quantum.steps", minimum=0)
        seed = _int(q.get("fiducial_seed", 0), "quantum.fiducial_seed", minimum=0)
        env = os.environ.get(SEED_ENV)
        if env is not None:
            try:
                seed = int(env)
            except ValueError:
                raise ConfigValidationError(SEED_ENV, f"expected an integer, got {env!r}") from None
        block = QuantumBlock(mode, d, weights, steps, _rho0(q.get("rho0", {"basis_state": 0}), d), seed)
        cfg = ExperimentConfig(group=spec, steps=steps, quantum=block)
    else:
        if "group" not in raw:
            raise ConfigValidationError("group", "required for classical walks")
        spec = _group(raw["group"])
        steps = _int(raw.get("steps", 0), "steps", minimum=0)
        cfg = ExperimentConfig(group=spec, steps=steps)
        if "step_distribution" in raw:
            cfg.step_distribution = _step_distribution(raw["step_distribution"], spec)
            cfg.transition = birkhoff.transition_matrix(spec, cfg.step_distribution)
        else:
            m = raw["transition_matrix"]
            if (not isinstance(m, list) or len(m) != spec.order
                    or any(not isinstance(r, list) or len(r) != spec.order for r in m)):
                raise ConfigValidationError(
                    "transition_matrix", f"expected a {spec.order}x{spec.order} nested list"
                )
            vals = [[_number(v, f"transition_matrix[{i}][{j}]") for j, v in enumerate(r)]
                    for i, r in enumerate(m)]
            try:
                P = birkhoff.TransitionMatrix.from_array(vals, renormalize=True)
            except DomainError as exc:
                raise ConfigValidationError("transition_matrix", str(exc)) from None
            cfg.transition = birkhoff.certify(spec, P)
        cfg.initial = _initial(raw.get("initial"), spec.order)

    cfg.epsilon = epsilon
    cfg.max_steps = max_steps
    poly = raw.get("polytope", {})
    if not isinstance(poly, dict):
        raise ConfigValidationError("polytope", "expected an object")
    kind = poly.get("kind", "subgroup")
    if kind not in ("subgroup", "full"):
        raise ConfigValidationError("polytope.kind", f"expected 'subgroup' or 'full', got {kind!r}")
    if kind == "full" and cfg.group.order > polytope.MAX_FULL_N:
        raise CapacityError(
            f"polytope.kind: full polytope needs n <= {polytope.MAX_FULL_N}, got n={cfg.group.order}"
        )
    cfg.polytope_kind = kind
    cfg.polytope_steps = _int(poly.get("steps", min(cfg.steps, DEFAULT_POLYTOPE_STEPS)),
                              "polytope.steps", minimum=0)
    if "query" in poly:
        cfg.query = _vector(poly["query"], "polytope.query", cfg.group.order)
    return cfg


def resolve_config_path(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    bundled = resources.files("abelian_walk") / "configs" / f"{Path(name).stem}.json"
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigParseError(f"config file not found: {name}")


def load_config(name: str) -> ExperimentConfig:
    path = resolve_config_path(name)
    try:
        raw = json.loads(path.read_text())
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigParseError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_config(raw)


# --- running ----------------------------------------------------------------

@dataclass
class TrajectoryReport:
    group: GroupSpec
    rows: list
    transition: birkhoff.TransitionMatrix
    spectrum: dict
    polytope: dict
    flags: dict
    mixing_time: Optional[int] = None
    bridge_deviation: Optional[float] = None
    extras: dict = field(default_factory=dict)

    @property
    def header(self) -> list:
        n = self.group.order
        return ["n"] + [f"q_{i}" for i in range(n)] + ["entropy_nats", "gini", "tv_to_u"]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([row["n"]] + [fmt(v) for v in row["q"]]
                       + [fmt(row["entropy_nats"]), fmt(row["gini"]), fmt(row["tv_to_u"])])
        return buf.getvalue()

    def to_dict(self) -> dict:
        out = {
            "group": {"kind": self.group.kind, "d": self.group.d, "order": self.group.order},
            "rows": [
                {"n": r["n"], "q": [float(fmt(v)) for v in r["q"]],
                 "entropy_nats": float(fmt(r["entropy_nats"])), "gini": float(fmt(r["gini"])),
                 "tv_to_u": float(fmt(r["tv_to_u"]))}
                for r in self.rows
            ],
            "spectrum": self.spectrum,
            "polytope": self.polytope,
            "flags": self.flags,
            "mixing_time_empirical": self.mixing_time,
            "membership_certificate": (
                None if self.transition.certificate is None
                else [float(fmt(v)) for v in self.transition.certificate]
            ),
        }
        if self.bridge_deviation is not None:
            out["bridge_deviation"] = float(fmt(self.bridge_deviation))
        out.update(self.extras)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _spectrum_summary(spec: GroupSpec, P: birkhoff.TransitionMatrix, epsilon) -> dict:
    if P.certificate is not None:
        s = birkhoff.spectrum(spec, P.certificate)
        eig, labels, method = s.eigenvalues, s.labels.tolist(), "characters"
    else:
        eig = np.linalg.eigvals(P.entries)
        order = np.argsort(-np.abs(eig), kind="stable")
        eig = eig[order]
        s = birkhoff.Spectrum(eig, np.arange(eig.size))
        labels, method = None, "dense"
    ergodic = birkhoff.is_ergodic(s)
    heuristic = None
    if ergodic and epsilon is not None:
        heuristic = birkhoff.mixing_time_heuristic(s, epsilon)
    return {
        "method": method,
        "eigenvalues": [[float(fmt(z.real)), float(fmt(z.imag))] for z in eig],
        "labels": labels,
        "e_max": float(fmt(s.e_max)),
        "ergodic": ergodic,
        "mixing_time_heuristic": None if heuristic is None else float(fmt(heuristic)),
    }


def _build_polytope(x, cfg: ExperimentConfig) -> polytope.ProbPolytope:
    if cfg.polytope_kind == "full":
        return polytope.full_polytope(x)
    return polytope.subgroup_polytope(x, cfg.group)


def _polytope_summary(qs: list, cfg: ExperimentConfig, with_vertices: bool = False) -> dict:
    k_max = min(cfg.polytope_steps, len(qs) - 1)
    polys = [_build_polytope(qs[k], cfg) for k in range(k_max + 1)]
    chain = [polytope.is_subset(polys[k + 1], polys[k]) for k in range(k_max)]
    out = {
        "kind": cfg.polytope_kind,
        "vertex_counts": [p.vertex_count for p in polys],
        "dimensions": [polytope.dimension(p) for p in polys],
        "circumradius": [float(fmt(polytope.circumradius(p))) for p in polys],
        "subset_chain": chain,
        "contains_u": [polytope.contains(p, birkhoff.uniform(p.n)) for p in polys],
    }
    if with_vertices:
        out["vertices"] = [[[float(fmt(v)) for v in row] for row in p.vertices] for p in polys]
    if cfg.query is not None:
        out["query"] = [float(fmt(v)) for v in cfg.query]
        out["query_contained"] = [polytope.contains(p, cfg.query) for p in polys]
    return out


def _flags(qs: list) -> dict:
    ents = [measures.entropy(q) for q in qs]
    ginis = [measures.gini(q) for q in qs]
    u = birkhoff.uniform(qs[0].size)
    tvs = [measures.tv_distance(q, u) for q in qs]
    pairs = list(zip(qs, qs[1:]))
    return {
        "majorization_chain": all(measures.majorizes(a, b) for a, b in pairs),
        "entropy_nondecreasing": all(b >= a - MONOTONE_SLACK for a, b in zip(ents, ents[1:])),
        "gini_nonincreasing": all(b <= a + MONOTONE_SLACK for a, b in zip(ginis, ginis[1:])),
        "tv_nonincreasing": all(b <= a + MONOTONE_SLACK for a, b in zip(tvs, tvs[1:])),
    }


def _rows(qs: list) -> list:
    u = birkhoff.uniform(qs[0].size)
    return [
        {"n": k, "q": q, "entropy_nats": measures.entropy(q), "gini": measures.gini(q),
         "tv_to_u": measures.tv_distance(q, u)}
        for k, q in enumerate(qs)
    ]


def _initial_density(block: QuantumBlock) -> np.ndarray:
    (name, value), = block.rho0.items()
    if name == "basis_state":
        return quantum.pure_density(quantum.position_state(block.d, value))
    if name == "momentum_state":
        return quantum.pure_density(quantum.momentum_state(block.d, value))
    return quantum.maximally_mixed(block.d)


def run(cfg: ExperimentConfig, with_vertices: bool = False) -> TrajectoryReport:
    """Execute the configured walk and collect every reported quantity."""
    extras = {}
    bridge = None
    if cfg.quantum is not None:
        block = cfg.quantum
        eta = None
        if block.mode == "povm":
            eta = quantum.random_fiducial(block.d, block.fiducial_seed)
            extras["fiducial"] = [[float(fmt(z.real)), float(fmt(z.imag))] for z in eta]
            extras["fiducial_seed"] = block.fiducial_seed
        walk = quantum.measured_walk(_initial_density(block), block.mode, block.weights, eta, block.steps)
        qs = walk.distributions
        P = walk.transition
        bridge = quantum.bridge_deviation(walk)
        extras["mode"] = block.mode
    else:
        P = cfg.transition
        qs = birkhoff.trajectory(cfg.initial, P, cfg.steps)

    mixing = None
    if cfg.epsilon is not None:
        mixing = birkhoff.mixing_time_empirical(qs[0], P, cfg.epsilon, cfg.max_steps)
    return TrajectoryReport(
        group=cfg.group,
        rows=_rows(qs),
        transition=P,
        spectrum=_spectrum_summary(cfg.group, P, cfg.epsilon),
        polytope=_polytope_summary(qs, cfg, with_vertices),
        flags=_flags(qs),
        mixing_time=mixing,
        bridge_deviation=bridge,
        extras=extras,
    )


def verify(cfg: ExperimentConfig) -> list:
    """Invariant checks on the configured walk as ``(name, passed)`` pairs."""
    report = run(cfg)
    P = report.transition
    checks = list(report.flags.items())
    u = birkhoff.uniform(P.size)
    checks.append(("uniform_fixed_point", bool(np.abs(u @ P.entries - u).max() <= 1e-12)))
    checks.append(("certified_in_subpolytope", P.certificate is not None))
    checks.append(("polytope_subset_chain", all(report.polytope["subset_chain"])))
    if report.bridge_deviation is not None:
        checks.append(("measurement_bridge", report.bridge_deviation <= BRIDGE_TOL))
    return checks


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_outputs(report: TrajectoryReport, out_dir: Path) -> list:
    files = {"trajectory.csv": report.to_csv(), "report.json": report.to_json()}
    if "mode" in report.extras:
        m = report.transition.entries
        files["transition.json"] = json.dumps([[float(fmt(v)) for v in row] for row in m]) + "\n"
    paths = []
    for name, text in files.items():
        _atomic_write(out_dir / name, text)
        paths.append(out_dir / name)
    return paths


# --- command line -------------------------------------------------------------

def _cmd_walk(cfg, args, expect_quantum: bool) -> int:
    if (cfg.quantum is not None) != expect_quantum:
        want = "a 'quantum' block" if expect_quantum else "a classical walk"
        raise ConfigValidationError("<root>", f"this subcommand needs {want}")
    report = run(cfg)
    write_outputs(report, Path(args.out))
    sys.stdout.write(report.to_csv() if args.format == "csv" else report.to_json())
    return 0


def _cmd_spectrum(cfg, args) -> int:
    P = cfg.transition
    if cfg.quantum is not None:
        run_report = run(cfg)
        P = run_report.transition
    summary = _spectrum_summary(cfg.group, P, cfg.epsilon)
    if args.format == "csv":
        sys.stdout.write("label,re,im,modulus\n")
        labels = summary["labels"] or list(range(len(summary["eigenvalues"])))
        for lab, (re, im) in zip(labels, summary["eigenvalues"]):
            sys.stdout.write(f"{lab},{fmt(re)},{fmt(im)},{fmt(math.hypot(re, im))}\n")
    else:
        sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    return 0


def _cmd_polytope(cfg, args) -> int:
    report = run(cfg, with_vertices=True)
    sys.stdout.write(json.dumps(report.polytope, indent=2) + "\n")
    return 0


def _cmd_verify(cfg, args) -> int:
    checks = verify(cfg)
    for name, ok in checks:
        sys.stdout.write(f"{'PASS' if ok else 'FAIL'} {name}\n")
    return 0 if all(ok for _, ok in checks) else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="config path or bundled config name")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="what to print on stdout")
    p = argparse.ArgumentParser(prog="abelian-walk",
                                description="Doubly stochastic random walks on finite Abelian groups")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("walk", parents=[common], help="run a classical walk")
    sub.add_parser("quantum", parents=[common], help="run a measured quantum walk")
    sub.add_parser("spectrum", parents=[common], help="eigenvalues and mixing estimates")
    sub.add_parser("polytope", parents=[common], help="polytope vertices and shrinkage")
    sub.add_parser("verify", parents=[common], help="check walk invariants")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "walk":
            return _cmd_walk(cfg, args, expect_quantum=False)
        if args.command == "quantum":
            return _cmd_walk(cfg, args, expect_quantum=True)
        if args.command == "spectrum":
            return _cmd_spectrum(cfg, args)
        if args.command == "polytope":
            return _cmd_polytope(cfg, args)
        return _cmd_verify(cfg, args)
    except ConfigParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ConfigValidationError, DomainError, NotErgodicError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

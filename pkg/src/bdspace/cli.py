"""Command-line front end: ``bdspace {validate,build,grow,probe}``.

Exit codes: 0 success, 1 semantic failure (infeasible parameters), 2 usage or parse
error, 3 resource limit.  Settings come from flags, then ``--config`` (flat
``key=value`` lines using the flag names), then built-in defaults.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from . import io as bdio
from .core import DEFAULT_DIM_CAP, build_ledger, projected_dims
from .errors import BDError, DomainError, InsufficientDataError, InvalidInputError, ResourceLimitError, StageError
from .operators import (
    COMPACT_THRESHOLD,
    FiniteOperator,
    default_extension_stage,
    defect_profile,
    demo_contradiction,
    find_block_witness,
    op_norm,
)
from .params import DEFAULT_A, DEFAULT_LAMBDA, Convention, Mode, Params, cubic_residual, solve_alpha, validate
from .sequences import CANDIDATES, bd_growth_experiment, growth_exponent, make_l2_blocks, partial_sum_norms

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    a: str = repr(DEFAULT_A)
    b: str = repr((1 - DEFAULT_A**3) ** (1 / 3))
    lam: str = repr(DEFAULT_LAMBDA)
    convention: str = Convention.INCLUSIVE.value
    mode: str = Mode.FLOAT.value
    stages: int = 5
    seed: int = 0
    format: str = "json"
    out: str | None = None
    threads: int = 1
    dim_cap: int = DEFAULT_DIM_CAP

    @property
    def exact(self) -> bool:
        return self.mode == Mode.EXACT.value

    def scalars(self):
        try:
            return tuple(bdio.parse_scalar(v, self.exact) for v in (self.a, self.b, self.lam))
        except InvalidInputError as exc:
            raise UsageError(str(exc)) from exc

    def params(self) -> Params:
        a, b, lam = self.scalars()
        return Params(a, b, lam, mode=self.mode, convention=self.convention)


# flag name -> RunConfig field
_COMMON = {
    "a": "a", "b": "b", "lambda": "lam", "convention": "convention", "mode": "mode",
    "stages": "stages", "seed": "seed", "format": "format", "out": "out",
    "threads": "threads", "dim-cap": "dim_cap",
}
_INT_FIELDS = {"stages", "seed", "threads", "dim_cap"}


def read_config_file(path) -> dict:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.lstrip("-").replace("_", "-")] = value
    return values


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--a")
    common.add_argument("--b")
    common.add_argument("--lambda", dest="lambda_")
    common.add_argument("--convention", choices=[c.value for c in Convention])
    common.add_argument("--mode", choices=[m.value for m in Mode])
    common.add_argument("--stages")
    common.add_argument("--seed")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("--out")
    common.add_argument("--threads")
    common.add_argument("--dim-cap", dest="dim_cap")
    common.add_argument("--config")

    parser = argparse.ArgumentParser(prog="bdspace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check (a, b, lambda) and solve for alpha")
    p = sub.add_parser("build", parents=[common], help="build stages and print dimensions")
    p.add_argument("--gamma-csv", dest="gamma_csv", help="also dump all gamma tuples to this CSV")
    p = sub.add_parser("grow", parents=[common], help="partial-sum growth experiment")
    p.add_argument("--candidate", choices=("l2",) + CANDIDATES)
    p.add_argument("--count")
    p.add_argument("--widths")
    p.add_argument("--ext-stage", dest="ext_stage")
    p.add_argument("--no-subsequence", dest="no_subsequence", action="store_const", const="true")
    p = sub.add_parser("probe", parents=[common], help="norms, defects, witness and contradiction bound")
    p.add_argument("operator", nargs="?")
    p.add_argument("--operator", dest="operator_flag")
    p.add_argument("--target-stage", dest="target_stage")
    p.add_argument("--ext-stage", dest="ext_stage")
    p.add_argument("--delta")
    p.add_argument("--after")
    p.add_argument("--C1")
    p.add_argument("--C2")
    return parser


def _resolve(args) -> tuple[RunConfig, dict]:
    """Merge flags over config file over defaults; returns the config and leftover keys."""
    flags = {k.rstrip("_").replace("_", "-"): v for k, v in vars(args).items() if v is not None}
    flags.pop("command", None)
    merged = read_config_file(flags.pop("config")) if "config" in flags else {}
    merged.update(flags)
    config = RunConfig()
    extra = {}
    for key, value in merged.items():
        field_name = _COMMON.get(key)
        if field_name is None:
            extra[key] = value
            continue
        if field_name in _INT_FIELDS:
            try:
                value = int(value)
            except ValueError as exc:
                raise UsageError(f"--{key} expects an integer, got {value!r}") from exc
        setattr(config, field_name, value)
    try:
        Mode(config.mode)
        Convention(config.convention)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if config.format not in ("json", "csv"):
        raise UsageError(f"unknown format {config.format!r}")
    return config, extra


def _int(extra, key, default):
    value = extra.get(key)
    if value is None:
        return default
    try:
        return int(value)
    except ValueError as exc:
        raise UsageError(f"--{key} expects an integer, got {value!r}") from exc


def _scalar(extra, key, default, exact):
    value = extra.get(key)
    if value is None:
        return default
    try:
        return bdio.parse_scalar(value, exact)
    except InvalidInputError as exc:
        raise UsageError(str(exc)) from exc


def _emit(config: RunConfig, text: str, stdout):
    if not text.endswith("\n"):
        text += "\n"
    if config.out:
        Path(config.out).write_text(text)
    else:
        stdout.write(text)


def _kv_csv(mapping: dict) -> str:
    flat = []

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k, v in obj.items():
                walk(f"{prefix}.{k}" if prefix else k, v)
        elif isinstance(obj, list) and obj and isinstance(obj[0], dict):
            for i, v in enumerate(obj):
                walk(f"{prefix}[{i}]", v)
        else:
            flat.append((prefix, obj if not isinstance(obj, list) else " ".join(map(str, obj))))

    walk("", bdio.to_jsonable(mapping))
    return bdio.rows_to_csv(["key", "value"], flat)


def cmd_validate(config: RunConfig, extra: dict, stdout) -> int:
    a, b, lam = config.scalars()
    report = validate(a, b, lam)
    try:
        alpha = solve_alpha(a, b).to_dict()
    except DomainError as exc:
        alpha = {"error": str(exc)}
    out = {"mode": config.mode, "validation": report, "alpha": alpha}
    _emit(config, bdio.dumps(out) if config.format == "json" else _kv_csv(out), stdout)
    return EXIT_OK if report.verdict else EXIT_FAIL


def cmd_build(config: RunConfig, extra: dict, stdout, stderr) -> int:
    params = config.params()
    ledger = build_ledger(params, config.stages, dim_cap=config.dim_cap, workers=config.threads)
    out = bdio.ledger_to_dict(ledger)
    out["cubic_residual"] = cubic_residual(params.a, params.b)
    if params.convention is Convention.PAPER_STRICT and ledger.top > 1:
        warning = "paper-strict convention: every extension set is empty, all stages have dimension 1"
        out["warning"] = warning
        stderr.write(f"warning: {warning}\n")
    if config.format == "json":
        text = bdio.dumps(out)
    else:
        counts = out["gamma_counts"] + [None]
        text = bdio.rows_to_csv(["n", "d_n", "gamma_count"],
                                [(n, d, c) for n, (d, c) in enumerate(zip(ledger.dims, counts), start=1)])
    _emit(config, text, stdout)
    if "gamma-csv" in extra:
        with open(extra["gamma-csv"], "w") as fh:
            bdio.write_gamma_csv(ledger, fh)
    return EXIT_OK


def cmd_grow(config: RunConfig, extra: dict, stdout, stderr) -> int:
    candidate = extra.get("candidate", "new-coordinates")
    count = _int(extra, "count", 16)
    if candidate == "l2":
        widths = _int(extra, "widths", 1)
        seq = make_l2_blocks(count, widths, seed=config.seed, exact=config.exact)
        norms = partial_sum_norms(seq, "l2")
        fit = growth_exponent(norms, label="full")
        params = config.params()
        out = {
            "candidate": "l2",
            "count": count,
            "full": fit,
            "squared_norms": partial_sum_norms(seq, "l2", squared=True) if config.exact else None,
            "alpha": solve_alpha(params.a, params.b).alpha,
            "cubic_residual": cubic_residual(params.a, params.b),
        }
    else:
        params = config.params()
        ledger = build_ledger(params, config.stages, dim_cap=config.dim_cap, workers=config.threads)
        N = _int(extra, "ext-stage", ledger.top)
        experiment = bd_growth_experiment(
            ledger, candidate, count, N=N, seed=config.seed,
            subsequence="no-subsequence" not in extra,
        )
        fit = experiment.full
        out = experiment.to_dict()
        out["cubic_residual"] = cubic_residual(params.a, params.b)
    if config.format == "json":
        text = bdio.dumps(out)
    else:
        text = bdio.rows_to_csv(["n", "norm"], list(enumerate(fit.norms, start=1)))
    _emit(config, text, stdout)
    return EXIT_OK


def _infer_stage(ledger_dims, rows):
    for n, d in enumerate(ledger_dims, start=1):
        if d == rows:
            return n
    raise UsageError(f"no stage has dimension {rows}; pass --target-stage")


def cmd_probe(config: RunConfig, extra: dict, stdout, stderr) -> int:
    path = extra.get("operator") or extra.get("operator-flag")
    if not path:
        raise UsageError("probe needs an operator CSV file")
    try:
        matrix = bdio.read_matrix_csv(Path(path), exact=config.exact)
    except OSError as exc:
        raise UsageError(f"cannot read operator file {path}: {exc}") from exc
    params = config.params()
    dims = projected_dims(params.convention, max(config.stages, 1))
    target = _int(extra, "target-stage", None)
    if target is None:
        target = _infer_stage(dims, matrix.shape[0])
    ledger = build_ledger(params, max(config.stages, target), dim_cap=config.dim_cap, workers=config.threads)
    T = FiniteOperator(matrix, target)
    N = _int(extra, "ext-stage", default_extension_stage(ledger, T))
    bracket = op_norm(T, ledger, N)
    profile = defect_profile(T, ledger, N)
    after = _int(extra, "after", T.source_dim // 2)
    default_delta = profile.values[after] / 2 if profile.values[after] > 0 else COMPACT_THRESHOLD
    delta = _scalar(extra, "delta", default_delta, False)
    witness = find_block_witness(T, ledger, N, delta, after=after)
    alpha = solve_alpha(params.a, params.b).alpha
    C1 = _scalar(extra, "C1", 1.0, False)
    C2 = _scalar(extra, "C2", 1.0, False)
    if bracket.upper > 0:
        contradiction = {
            "norm_T": bracket.upper, "C1": C1, "C2": C2, "alpha": alpha,
            "bound": demo_contradiction(bracket.upper, C1, C2, alpha),
        }
    else:
        contradiction = {"norm_T": 0.0, "C1": C1, "C2": C2, "alpha": alpha, "bound": None,
                         "note": "zero operator: no growth lower bound to contradict"}
    out = {
        "target_stage": target,
        "source_dim": T.source_dim,
        "op_norm": bracket,
        "defect_profile": profile,
        "compact_threshold": COMPACT_THRESHOLD,
        "witness": {"delta": delta, "after": after, "block": witness},
        "contradiction": contradiction,
        "cubic_residual": cubic_residual(params.a, params.b),
    }
    if config.format == "json":
        text = bdio.dumps(out)
    else:
        header = "".join(
            f"# {k}={v}\n" for k, v in (
                ("lower", bdio.to_jsonable(bracket.lower)), ("upper", bdio.to_jsonable(bracket.upper)),
                ("witness", "none" if witness is None else f"({witness.start},{witness.stop}]"),
                ("contradiction_bound", contradiction["bound"]),
            )
        )
        text = header + bdio.rows_to_csv(["k", "delta_k"], list(enumerate(profile.values)))
    _emit(config, text, stdout)
    return EXIT_OK


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        config, extra = _resolve(args)
        if args.command == "validate":
            return cmd_validate(config, extra, stdout)
        if args.command == "build":
            return cmd_build(config, extra, stdout, stderr)
        if args.command == "grow":
            return cmd_grow(config, extra, stdout, stderr)
        return cmd_probe(config, extra, stdout, stderr)
    except UsageError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except ResourceLimitError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_RESOURCE
    except InsufficientDataError as exc:
        norms = ", ".join(str(bdio.to_jsonable(v)) for v in exc.norms)
        stderr.write(f"error: {exc}; norms: [{norms}]\n")
        return EXIT_USAGE
    except (InvalidInputError, StageError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except DomainError as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_FAIL
    except BDError as exc:  # pragma: no cover
        stderr.write(f"error: {exc}\n")
        return EXIT_FAIL


def run():  # console-script entry point
    sys.exit(main())


if __name__ == "__main__":
    run()

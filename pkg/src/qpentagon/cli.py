"""Command-line driver.

    qpentagon verify {main,no-abs,pentagon} --config FILE --out REPORT.json
    qpentagon bailey --config FILE --out REPORT.json
    qpentagon kernel {qpoch,ratio,bkernel} key=value ...

Exit codes: 0 when nothing failed, 1 on a verification failure, 2 on a usage
or configuration error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict

from . import config as cfgmod
from . import report
from .bailey import DEFAULT_PROBES, lemma_probes
from .errors import QPentagonError
from .identities import CHECKS, ResidualReport, Status, lifted_lhs_check
from .qkernel import (
    ChargedFugacity,
    Nome,
    b_kernel,
    charged_ratio,
    charged_ratio_signed,
    qpochhammer,
)
from .quadrature import ChargeWindow, CircleGrid
from .sampler import bailey_draws, main_instances

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _status_row(rep: ResidualReport, names=("lhs", "rhs")) -> dict:
    return {
        names[0]: report.cplx(rep.lhs),
        names[1]: report.cplx(rep.rhs),
        "relative_residual": rep.relative_residual,
        "error_budget": rep.error_budget,
        "passed": rep.passed,
        "status": rep.status.value,
    }


def _summary(rows: list[dict], tolerance: float) -> dict:
    counts = {s.value: 0 for s in Status}
    for row in rows:
        counts[row["status"]] += 1
    residuals = [r["relative_residual"] for r in rows if "relative_residual" in r]
    return {
        "rows": len(rows),
        "passed": counts["PASSED"],
        "under_resolved": counts["UNDER_RESOLVED"],
        "failed": counts["FAILED"],
        "max_relative_residual": max(residuals, default=0.0),
        "tolerance": tolerance,
    }


def _manifest(command: str, run: cfgmod.RunConfig) -> report.RunManifest:
    return report.RunManifest(
        command=command,
        config_hash=run.fingerprint(),
        rng_seed=run.sampler.rng_seed,
        grid_points=run.grid_points,
        m_max=run.m_max,
        policy=asdict(run.policy),
    )


def _finish(args, command, run, rows, tolerance) -> int:
    summary = _summary(rows, tolerance)
    try:
        json_path, csv_path = report.write(args.out, _manifest(command, run), rows, summary)
    except OSError as exc:
        raise UsageError(f"cannot write report to {args.out}: {exc.strerror}") from exc
    print(f"{command}: {summary['passed']} passed, {summary['under_resolved']} under-resolved, "
          f"{summary['failed']} failed; max residual {summary['max_relative_residual']:.3e}")
    print(f"report: {json_path} ({csv_path.name})")
    if summary["under_resolved"]:
        print(f"warning: {summary['under_resolved']} row(s) exceed the tolerance but lie within "
              "the error budget; refine the grid or window", file=sys.stderr)
    return EXIT_FAIL if summary["failed"] else EXIT_OK


def _instance_row(index: int, inst) -> dict:
    return {
        "index": index,
        "q": report.cplx(inst.nome.q),
        "a": [report.cplx(f.fugacity) for f in inst.a],
        "b": [report.cplx(f.fugacity) for f in inst.b],
        "m": [f.charge for f in inst.a],
        "n": [f.charge for f in inst.b],
    }


def cmd_verify(args) -> int:
    run = cfgmod.load(args.config, cfgmod.VERIFY_DEFAULTS,
                      overrides={"rng_seed": args.seed, "grid_points": args.grid,
                                 "m_max": args.mmax, "instances": args.instances})
    grid, window = CircleGrid(run.grid_points), ChargeWindow(run.m_max)
    check = CHECKS[args.identity]
    rows = []
    for i, inst in enumerate(main_instances(run.sampler, run.instances)):
        row = _instance_row(i, inst)
        try:
            rep = check(inst, grid, window, run.policy, run.identity_tolerance, run.safety_factor)
            row.update(_status_row(rep))
            if args.identity == "no-abs":
                lifted = lifted_lhs_check(inst, grid, window, run.policy,
                                          safety_factor=run.safety_factor)
                row["lifted_lhs_residual"] = lifted.relative_residual
        except QPentagonError as exc:
            row.update(status=Status.FAILED.value, error=f"{type(exc).__name__}: {exc}")
        rows.append(row)
    return _finish(args, f"verify {args.identity}", run, rows, run.identity_tolerance)


def cmd_bailey(args) -> int:
    run = cfgmod.load(args.config, cfgmod.BAILEY_DEFAULTS,
                      overrides={"rng_seed": args.seed, "grid_points": args.grid,
                                 "m_max": args.mmax, "instances": args.instances})
    grid, window = CircleGrid(run.grid_points), ChargeWindow(run.m_max)
    rows = []
    for i, (params, alpha) in enumerate(bailey_draws(run.sampler, run.instances, run.bailey_charges)):
        base = {
            "pair": i,
            "q": report.cplx(params.nome.q),
            "t": report.cplx(params.t),
            "s": report.cplx(params.s),
            "u": report.cplx(params.u),
            "charges": {"n_t": params.n_t, "n_s": params.n_s, "n_u": params.n_u},
            "alpha": {str(n): {str(e): report.cplx(c) for e, c in poly.items()}
                      for n, poly in alpha.components.items()},
        }
        try:
            probes = lemma_probes(alpha, params, DEFAULT_PROBES, grid, window, run.policy)
        except QPentagonError as exc:
            rows.append(dict(base, status=Status.FAILED.value, error=f"{type(exc).__name__}: {exc}"))
            continue
        for pr in probes:
            rep = ResidualReport.compare(pr.chain, pr.direct, pr.error_budget,
                                         run.lemma_tolerance, run.safety_factor)
            rows.append(dict(base, n=pr.n, w=report.cplx(pr.w), **_status_row(rep, ("chain", "direct"))))
    return _finish(args, "bailey", run, rows, run.lemma_tolerance)


# --------------------------------------------------------------------------
# kernel spot evaluation

_KERNEL_KEYS = {
    "qpoch": ({"z", "q"}, {"q_half"}),
    "ratio": ({"z", "m", "q"}, {"q_half", "signed"}),
    "bkernel": ({"a", "n", "b", "m", "q"}, {"q_half"}),
}


def _kernel_args(expr: str, items: list[str]) -> dict[str, str]:
    required, optional = _KERNEL_KEYS[expr]
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or key not in required | optional:
            raise UsageError(f"bad argument {item!r}; {expr} takes "
                             + " ".join(f"{k}=..." for k in sorted(required | optional)))
        out[key] = value
    missing = sorted(required - set(out))
    if missing:
        raise UsageError(f"{expr}: missing {', '.join(missing)}")
    return out


def _num(key: str, text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise UsageError(f"{key}={text!r} is not a number") from None


def _int(key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"{key}={text!r} is not an integer") from None


def _full(z: complex) -> str:
    return f"{z.real:.17g} {z.imag:+.17g}j"


def cmd_kernel(args) -> int:
    kw = _kernel_args(args.expr, args.args)
    q_half = _num("q_half", kw["q_half"]) if "q_half" in kw else None
    try:
        nome = Nome(_num("q", kw["q"]), q_half)
        if args.expr == "qpoch":
            kv = qpochhammer(_num("z", kw["z"]), nome)
        elif args.expr == "ratio":
            m = _int("m", kw["m"])
            signed = kw.get("signed", "false").lower() in ("1", "true", "yes")
            fn = charged_ratio_signed if signed else charged_ratio
            kv = fn(_num("z", kw["z"]), m, nome)
            if m % 2:
                print(f"note: odd charge {m}; q^(1/2) is taken as q_half = {_full(nome.q_half)}")
        else:
            a = ChargedFugacity(_num("a", kw["a"]), _int("n", kw["n"]))
            b = ChargedFugacity(_num("b", kw["b"]), _int("m", kw["m"]))
            kv = b_kernel(a, b, nome)
    except QPentagonError as exc:
        raise UsageError(f"{type(exc).__name__}: {exc}") from exc
    print(f"value      = {_full(kv.value)}")
    print(f"tail_bound = {kv.tail_bound:.17g}")
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qpentagon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--out", required=True, help="JSON report path; a CSV is written beside it")
        p.add_argument("--seed", type=int)
        p.add_argument("--grid", type=int, help="quadrature points N")
        p.add_argument("--mmax", type=int, help="charge window half-width")
        p.add_argument("--instances", type=int, help="number of sampled instances")

    v = sub.add_parser("verify", help="check one identity on sampled instances")
    v.add_argument("identity", choices=sorted(CHECKS))
    common(v)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bailey", help="compare the two routes of the Bailey lemma")
    common(b)
    b.set_defaults(func=cmd_bailey)

    k = sub.add_parser("kernel", help="evaluate one kernel at literal arguments")
    k.add_argument("expr", choices=sorted(_KERNEL_KEYS))
    k.add_argument("args", nargs="*", metavar="key=value")
    k.set_defaults(func=cmd_kernel)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except cfgmod.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QPentagonError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

    cqt check <file>                     consistency verdict and history table
    cqt prob <file> --history 1,2        probability of a history (``1+2,1`` = compound)
    cqt static <file> --event 1,3        single-time event probability at a step
    cqt run <file>                       evaluate the queries listed in the file
    cqt demo two-slit|mermin|cz|diosi    bundled verifications

Files may be given as ``@name`` to use a bundled scenario.  Exit status of
``check``: 0 medium-consistent, 2 weakly consistent only, 3 inconsistent,
1 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .errors import CQTError
from .histories import (
    TOL_DEC,
    DecoherenceReport,
    DynamicEvent,
    Family,
    Verdict,
    born_probability,
    classify,
    event_probability,
)
from .oracles import (
    NoGoInstance,
    build_two_slit,
    cz_check,
    diosi_check,
    mermin_no_go,
    random_cz_instance,
    two_slit_merged,
    weak_only_qubit,
)
from .sampling import random_family
from .scenario import Scenario
from .serialize import FormatError, read_sample_space
from .static import (
    FrameworkStatic,
    noncontextuality_check,
    pure_truth_values,
    to_bitmask,
)

REPORT_VERSION = "1"
EXIT_OK, EXIT_INPUT, EXIT_WEAK, EXIT_INCONSISTENT = 0, 1, 2, 3
EXIT_FOR_VERDICT = {
    Verdict.MEDIUM_CONSISTENT: EXIT_OK,
    Verdict.WEAK_ONLY: EXIT_WEAK,
    Verdict.INCONSISTENT: EXIT_INCONSISTENT,
}
DEMOS = ("two-slit", "mermin", "cz", "diosi")


class UsageError(CQTError):
    pass


# --- parsing helpers ------------------------------------------------------------


def parse_history(text: str, fam: Family) -> list[tuple[int, ...]]:
    """Parse ``"1,2"`` / ``"1+2,1"`` into per-time 0-based index sets."""
    tokens = [t.strip() for t in text.split(",")]
    if len(tokens) != fam.n_times:
        raise UsageError(f"history {text!r} has {len(tokens)} entries, family has {fam.n_times} times")
    out = []
    for n, tok in enumerate(tokens):
        try:
            idx = sorted({int(p) - 1 for p in tok.split("+")})
        except ValueError:
            raise UsageError(f"bad history entry {tok!r}; expected 1-based indices joined by '+'")
        for j in idx:
            if not 0 <= j < fam.shape[n]:
                raise UsageError(f"index {j + 1} at time {n + 1} out of range 1..{fam.shape[n]}")
        out.append(tuple(idx))
    return out


def parse_mask(text: str, size: int) -> tuple[int, ...]:
    try:
        idx = sorted({int(p) - 1 for p in text.split(",") if p.strip()})
    except ValueError:
        raise UsageError(f"bad event {text!r}; expected comma-separated 1-based member indices")
    for j in idx:
        if not 0 <= j < size:
            raise UsageError(f"member {j + 1} out of range 1..{size}")
    return tuple(idx)


def fmt_prob(p: float) -> str:
    return f"{p:.12f}"


def fmt_complex(z: complex) -> str:
    return f"{z.real:+.12f}{z.imag:+.12f}i"


# --- report builders --------------------------------------------------------------


def check_report(sc: Scenario, rep: DecoherenceReport) -> dict:
    worst = None
    if rep.worst_pair is not None:
        z = rep.worst_value
        mag = abs(z.real) if rep.verdict is Verdict.INCONSISTENT else abs(z)
        worst = {
            "pair": [[j + 1 for j in rep.worst_pair[0]], [j + 1 for j in rep.worst_pair[1]]],
            "D": [z.real, z.imag],
            "magnitude": mag,
        }
    return {
        "version": REPORT_VERSION,
        "scenario_hash": sc.hash,
        "verdict": str(rep.verdict),
        "tol": rep.tol,
        "D_offdiag_max": rep.offdiag_max,
        "worst": worst,
        "probabilities": [
            {"history": [j + 1 for j in h], "p": float(p)} for h, p in zip(rep.histories, rep.probabilities)
        ],
    }


def render_check(r: dict) -> str:
    lines = [f"verdict: {r['verdict']}  (tol {r['tol']:g})"]
    if r["worst"]:
        w = r["worst"]
        pair = " ".join("(" + ",".join(map(str, p)) + ")" for p in w["pair"])
        lines.append(f"worst off-diagonal pair: {pair}  D = {fmt_complex(complex(*w['D']))}  "
                     f"magnitude {w['magnitude']:.12g}")
    lines.append(f"max |D| off-diagonal: {r['D_offdiag_max']:.3e}")
    lines.append("")
    lines.append(f"{'history':<16}{'probability':>16}")
    for row in r["probabilities"]:
        h = "(" + ",".join(map(str, row["history"])) + ")"
        lines.append(f"{h:<16}{fmt_prob(row['p']):>16}")
    lines.append(f"{'total':<16}{fmt_prob(sum(x['p'] for x in r['probabilities'])):>16}")
    return "\n".join(lines)


def history_probability(fam: Family, sets: list[tuple[int, ...]], tol: float) -> tuple[float, bool]:
    """Probability of the event given per-time sets; second value flags a compound event."""
    if all(len(s) == 1 for s in sets):
        return born_probability(fam, [s[0] for s in sets]), False
    event = DynamicEvent.homogeneous(fam, [to_bitmask(s) for s in sets])
    return event_probability(fam, event, classify(fam, tol)), True


# --- commands -----------------------------------------------------------------------


def emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def cmd_check(args) -> int:
    sc = Scenario.load(args.file)
    rep = classify(sc.family(), args.tol)
    r = check_report(sc, rep)
    emit(args, r, render_check(r))
    return EXIT_FOR_VERDICT[rep.verdict]


def cmd_prob(args) -> int:
    sc = Scenario.load(args.file)
    fam = sc.family()
    sets = parse_history(args.history, fam)
    p, compound = history_probability(fam, sets, args.tol)
    payload = {
        "version": REPORT_VERSION,
        "scenario_hash": sc.hash,
        "history": [[j + 1 for j in s] for s in sets],
        "compound": compound,
        "probability": p,
    }
    emit(args, payload, fmt_prob(p))
    return EXIT_OK


def cmd_static(args) -> int:
    sc = Scenario.load(args.file)
    if not sc.spaces:
        raise UsageError("scenario has no steps")
    if not 1 <= args.step <= len(sc.spaces):
        raise UsageError(f"step {args.step} out of range 1..{len(sc.spaces)}")
    k = args.step - 1
    fw = sc.framework(k)
    mask = to_bitmask(parse_mask(args.event, fw.size))
    rho = sc.state_at(k)
    p = float(np.clip(rho.expectation(fw.projector(mask)).real, 0.0, 1.0))
    truth = None
    if rho.is_pure():
        truth = pure_truth_values(rho.state_vector(), fw)[mask].name.lower()
    payload = {
        "version": REPORT_VERSION,
        "scenario_hash": sc.hash,
        "step": args.step,
        "event": [j + 1 for j in range(fw.size) if mask >> j & 1],
        "probability": p,
        "truth": truth,
    }
    text = fmt_prob(p) + (f"  truth: {truth}" if truth else "")
    emit(args, payload, text)
    return EXIT_OK


def run_query(sc: Scenario, q: dict, i: int, tol: float) -> dict:
    kind = q["kind"]
    path = f"queries[{i}]"
    if kind == "classify":
        rep = classify(sc.family(), tol)
        return {"kind": kind, "verdict": str(rep.verdict), "D_offdiag_max": rep.offdiag_max}
    if kind == "probability":
        if not isinstance(q.get("history"), str):
            raise FormatError(f"{path}.history", "expected a string like \"1,2\"")
        fam = sc.family()
        sets = parse_history(q["history"], fam)
        try:
            p, compound = history_probability(fam, sets, tol)
        except CQTError as exc:
            return {"kind": kind, "history": q["history"], "error": str(exc)}
        return {"kind": kind, "history": q["history"], "compound": compound, "probability": p}
    if kind == "truth":
        step = q.get("step", 1)
        if not isinstance(step, int) or not 1 <= step <= len(sc.spaces):
            raise FormatError(f"{path}.step", f"expected a step in 1..{len(sc.spaces)}")
        rho = sc.state_at(step - 1)
        if not rho.is_pure():
            raise FormatError(path, "truth values need a pure state")
        fw = sc.framework(step - 1)
        tv = pure_truth_values(rho.state_vector(), fw)
        return {
            "kind": kind,
            "step": step,
            "values": {
                ",".join(str(j + 1) for j in range(fw.size) if m >> j & 1) or "-": v.name.lower()
                for m, v in tv.items()
            },
        }
    # noncontextuality
    spaces = q.get("spaces")
    if not isinstance(spaces, list) or len(spaces) != 2:
        raise FormatError(f"{path}.spaces", "expected two sample spaces")
    fws = [FrameworkStatic(read_sample_space(s, f"{path}.spaces[{k}]", sc.dim)) for k, s in enumerate(spaces)]
    step = q.get("step")
    rho = sc.state_at(None if step is None else step - 1)
    rep = noncontextuality_check(rho, *fws)
    return {"kind": kind, "shared_events": len(rep.shared), "max_deviation": rep.max_deviation}


def cmd_run(args) -> int:
    sc = Scenario.load(args.file)
    results = [run_query(sc, q, i, args.tol) for i, q in enumerate(sc.queries)]
    payload = {"version": REPORT_VERSION, "scenario_hash": sc.hash, "results": results}
    lines = []
    for r in results:
        body = {k: v for k, v in r.items() if k != "kind"}
        lines.append(f"{r['kind']:<18}" + "  ".join(f"{k}={_short(v)}" for k, v in body.items()))
    emit(args, payload, "\n".join(lines) if lines else "no queries")
    return EXIT_OK


def _short(v) -> str:
    if isinstance(v, float):
        return fmt_prob(v) if 0 <= v <= 1 else f"{v:.3e}"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}:{x}" for k, x in v.items()) + "}"
    return str(v)


# --- demos ---------------------------------------------------------------------------


def demo_two_slit(seed: int, tol: float) -> dict:
    plain, marked = classify(build_two_slit(False), tol), classify(build_two_slit(True), tol)
    merged = classify(two_slit_merged(), tol)
    checks = [
        ("unmarked is inconsistent", plain.verdict is Verdict.INCONSISTENT, abs(plain.worst_value.real)),
        ("marked is medium-consistent", marked.verdict is Verdict.MEDIUM_CONSISTENT, marked.offdiag_max),
        ("merged-slit family is medium-consistent", merged.verdict is Verdict.MEDIUM_CONSISTENT,
         merged.offdiag_max),
    ]
    return {"checks": [{"name": n, "pass": bool(ok), "residual": float(r)} for n, ok, r in checks]}


def demo_mermin(seed: int, tol: float) -> dict:
    inst = NoGoInstance.peres_mermin()
    n = mermin_no_go(inst)
    return {
        "checks": [{"name": "no consistent assignment", "pass": n == 0, "residual": float(n)}],
        "summary": f"{n} satisfying assignments of 512",
    }


def demo_cz(seed: int, tol: float) -> dict:
    rng = np.random.default_rng(seed)
    checks = {}
    for _ in range(10):
        rep = cz_check(random_cz_instance(int(rng.integers(2, 7)), rng), 20, rng)
        for c in rep.checks:
            prev = checks.get(c.name)
            if prev is None or c.residual > prev["residual"]:
                checks[c.name] = {"name": c.name, "pass": c.passed and (prev or {"pass": True})["pass"],
                                  "residual": c.residual}
    return {"checks": list(checks.values())}


def demo_diosi(seed: int, tol: float) -> dict:
    w = weak_only_qubit()
    rep = diosi_check(w, w, tol=tol)
    rng = np.random.default_rng(seed)
    f1, f2 = random_family(rng, 2, 2), random_family(rng, 3, 2)
    f2 = Family.build(f2.state, f2.spaces, f1.times, f2.hamiltonian, f1.t0)
    rand = diosi_check(f1, f2, tol=tol)
    checks = [{"name": "weak-only witness: " + c.name, "pass": c.passed, "residual": c.residual}
              for c in rep.checks]
    checks.append({"name": "witness found", "pass": bool(rep.witness["found"]), "residual": 0.0})
    checks += [{"name": "random product: " + c.name, "pass": c.passed, "residual": c.residual}
               for c in rand.checks]
    return {"checks": checks, "witness": rep.witness}


DEMO_FUNCS = {"two-slit": demo_two_slit, "mermin": demo_mermin, "cz": demo_cz, "diosi": demo_diosi}


def cmd_demo(args) -> int:
    out = DEMO_FUNCS[args.name](args.seed, args.tol)
    ok = all(c["pass"] for c in out["checks"])
    lines = [f"{'PASS' if c['pass'] else 'FAIL'}  {c['name']:<48} residual {c['residual']:.3e}"
             for c in out["checks"]]
    if "summary" in out:
        lines.append(out["summary"])
    if out.get("witness", {}).get("found"):
        w = out["witness"]
        lines.append(f"witness: D1 = {fmt_complex(complex(*w['D1']))}, D2 = {fmt_complex(complex(*w['D2']))}, "
                     f"D1*D2 = {fmt_complex(complex(*w['product']))}")
    emit(args, {"version": REPORT_VERSION, "demo": args.name, "passed": ok, **out}, "\n".join(lines))
    return EXIT_OK if ok else EXIT_INPUT


# --- entry point ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=TOL_DEC, help="consistency tolerance on |D| entries")
    common.add_argument("--format", choices=("table", "json"), default="table")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized demos")

    p = argparse.ArgumentParser(prog="cqt", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"cqt {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", parents=[common], help="classify a scenario's family")
    s.add_argument("file")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("prob", parents=[common], help="probability of a history")
    s.add_argument("file")
    s.add_argument("--history", required=True, help="1-based indices per time, e.g. 1,2 or 1+2,1")
    s.set_defaults(func=cmd_prob)

    s = sub.add_parser("static", parents=[common], help="single-time event probability")
    s.add_argument("file")
    s.add_argument("--event", required=True, help="1-based member indices, e.g. 1,3")
    s.add_argument("--step", type=int, default=1, help="which step's sample space (1-based)")
    s.set_defaults(func=cmd_static)

    s = sub.add_parser("run", parents=[common], help="evaluate the scenario's queries")
    s.add_argument("file")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("demo", parents=[common], help="run a bundled verification")
    s.add_argument("name", choices=DEMOS)
    s.set_defaults(func=cmd_demo)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CQTError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

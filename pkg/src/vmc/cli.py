"""Command-line front end: ``vmc <command> ...``.

Exit codes: 0 on success, 1 when a validation fails (a report is printed),
2 on usage errors. Rationals are read and written as ``"num/den"`` strings.
Every run writes a manifest (command, arguments, seed, version, input hashes,
timestamp): next to ``--out`` when given, otherwise to stderr. Set ``VMC_LOG``
to a logging level name for diagnostics.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import logging
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from . import __version__
from .birkhoff import classify_pair, kernel_witness_suite
from .compat import (
    D2Vector,
    canonical_data_estimate,
    check_compatibility,
    delta_vid,
    estimate_from_samples,
    psi,
    psi_inverse,
)
from .equilibrium import equilibrium_family, stationary_family
from .errors import VmcError
from .examples import LadderParams, ladder_vtm, reflecting_walk_vtm, splitting_vtm_vid, top_start_vid, uniform_vtm
from .initdist import VidPrefix, virtual_uniform
from .pathspace import PathPrefix, project_path
from .rational import fmt, rat
from .sim import (
    RenewalConfig,
    SplittingConfig,
    coupled_from_hits,
    run_replicas,
    sample_vmc,
    simulate_circle_rotation,
    simulate_renewal,
    simulate_splitting,
)
from .transmat import TruncatedTM, VtmPrefix, check_vtm_prefix, lift_classical_tm, project_tm_to
from .vperm import VPermPrefix, random_prefix, vtm_of

log = logging.getLogger("vmc")


class UsageError(Exception):
    pass


class ValidationFailed(Exception):
    def __init__(self, report: dict[str, Any]):
        super().__init__(report.get("message", "validation failed"))
        self.report = report


class Context:
    def __init__(self, args: argparse.Namespace, argv: Sequence[str]):
        self.args = args
        self.argv = list(argv)
        self.hashes: dict[str, str] = {}

    def load(self, name: str) -> Any:
        """Read JSON from a path or ``-`` for stdin, remembering its hash."""
        if name == "-":
            raw = sys.stdin.read().encode()
        else:
            try:
                raw = Path(name).read_bytes()
            except OSError as e:
                raise UsageError(f"cannot read {name}: {e}") from e
        self.hashes[name] = hashlib.sha256(raw).hexdigest()
        try:
            return json.loads(raw)
        except json.JSONDecodeError as e:
            raise UsageError(f"{name} is not valid JSON: {e}") from e

    def manifest(self) -> dict[str, Any]:
        return {
            "command": self.args.command,
            "arguments": self.argv,
            "seed": getattr(self.args, "seed", None),
            "version": __version__,
            "input_hashes": self.hashes,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        }

    def emit(self, doc: Any) -> None:
        text = json.dumps(doc, indent=2, sort_keys=False) + "\n"
        out = getattr(self.args, "out", None)
        if out and not getattr(self.args, "out_is_dir", False):
            Path(out).write_text(text)
            Path(str(out) + ".manifest.json").write_text(json.dumps(self.manifest(), indent=2) + "\n")
        else:
            sys.stdout.write(text)
            sys.stderr.write(json.dumps({"manifest": self.manifest()}) + "\n")


def _load_vtm(ctx: Context, name: str) -> VtmPrefix:
    data = ctx.load(name)
    if "matrices" in data:
        return VtmPrefix.from_json(data)
    if "rows" in data:
        return lift_classical_tm(TruncatedTM.from_json(data))
    raise UsageError(f"{name} holds neither 'matrices' nor 'rows'")


def _load_vid(ctx: Context, name: str) -> VidPrefix:
    data = ctx.load(name)
    if "dists" in data:
        return VidPrefix.from_json(data)
    if "vid" in data:
        return VidPrefix.from_json(data["vid"])
    raise UsageError(f"{name} holds no 'dists'")


def _fail(message: str, **extra: Any) -> None:
    raise ValidationFailed({"ok": False, "message": message, **extra})


def cmd_project(ctx: Context) -> None:
    a = ctx.args
    if (a.path is None) == (a.tm is None):
        raise UsageError("give exactly one of --path or --tm")
    if a.path is not None:
        x = PathPrefix.from_json(ctx.load(a.path))
        ctx.emit(project_path(x, a.level).to_json())
    else:
        data = ctx.load(a.tm)
        k = TruncatedTM.from_json(data)
        ctx.emit(project_tm_to(k, a.level).to_json(data.get("convention", "pmatrix") if _bracketable(k) else "pmatrix"))


def _bracketable(k: TruncatedTM) -> bool:
    return all(r[0] == 0 for r in k.rows[1:])


def cmd_check(ctx: Context) -> None:
    data = ctx.load(ctx.args.vtm)
    mats = tuple(TruncatedTM.from_json(m) for m in data["matrices"])
    rep = check_vtm_prefix(mats)
    if not rep.ok:
        f = rep.failure
        assert f is not None
        _fail(
            "not projective",
            level=f.level,
            a=f.a,
            b=f.b,
            expected=fmt(f.expected),
            actual=fmt(f.actual),
        )
    ctx.emit({"ok": True, "levels": len(mats)})


def cmd_check_compat(ctx: Context) -> None:
    k = _load_vtm(ctx, ctx.args.vtm)
    nu = _load_vid(ctx, ctx.args.vid)
    rep = check_compatibility(nu, k)
    if not rep.ok:
        f = rep.failure
        assert f is not None
        _fail("not compatible", level=f.level, a=f.a, expected=fmt(f.expected), actual=fmt(f.actual))
    ctx.emit({"ok": True, "levels": k.level})


def cmd_psi(ctx: Context) -> None:
    k = _load_vtm(ctx, ctx.args.vtm)
    if ctx.args.inverse:
        if ctx.args.vid is None:
            raise UsageError("--inverse needs --vid")
        ctx.emit(psi_inverse(_load_vid(ctx, ctx.args.vid), k).to_json())
    else:
        if ctx.args.p is None:
            raise UsageError("psi needs --p")
        p = D2Vector.from_json(ctx.load(ctx.args.p))
        ctx.emit(psi(k, p).to_json())


def cmd_delta_vid(ctx: Context) -> None:
    k = _load_vtm(ctx, ctx.args.vtm)
    ctx.emit(delta_vid(k, ctx.args.state).to_json())


def cmd_equilibrium(ctx: Context) -> None:
    k = _load_vtm(ctx, ctx.args.vtm)
    fam = equilibrium_family(k)
    doc: dict[str, Any] = {"dists": [[fmt(x) for x in v] for v in fam.dists], "is_vd": fam.is_vd}
    if ctx.args.check_stationary:
        st = stationary_family(k)
        doc["stationary"] = (
            {"empty": False}
            if not st.empty
            else {
                "empty": True,
                "reason": st.reason,
                "level": st.level,
                "state": st.state,
                "lhs": fmt(st.lhs) if st.lhs is not None else None,
                "rhs": fmt(st.rhs) if st.rhs is not None else None,
            }
        )
    ctx.emit(doc)


def cmd_birkhoff(ctx: Context) -> None:
    a = ctx.args
    if a.action == "classify":
        rep = classify_pair(_load_vtm(ctx, a.a), _load_vtm(ctx, a.b))
        ctx.emit(rep.to_json())
    else:
        v = kernel_witness_suite(_load_vtm(ctx, a.vtm))
        ctx.emit(
            {
                "in_kernel_up_to_level": v.in_kernel,
                "excluded_at": v.excluded_at,
                "witness": v.witness,
            }
        )


def cmd_vperm(ctx: Context) -> None:
    a = ctx.args
    if a.action == "random":
        s = random_prefix(a.level, np.random.default_rng(a.seed))
        ctx.emit(s.to_json())
    else:
        s = VPermPrefix.from_json(ctx.load(a.perms))
        if a.action == "vtm":
            ctx.emit(vtm_of(s).to_json("bracket"))
        else:
            ctx.emit({"ok": True, "levels": s.level})


def _write_estimate(out: Path, est) -> None:
    (out / "estimate.json").write_text(json.dumps(est.to_json(), indent=2) + "\n")
    with (out / "summary.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["level", "from", "to", "k_hat", "se", "row_count"])
        for n in range(1, est.level + 1):
            for i in range(n + 1):
                cnt = est.row_count(n, i)
                for j in range(n + 1):
                    kh = est.k_hat[n - 1][i, j]
                    se = est.k_se[n - 1][i, j]
                    w.writerow([n, i, j, "" if np.isnan(kh) else repr(float(kh)), "" if np.isnan(se) else repr(float(se)), cnt])


def cmd_simulate(ctx: Context) -> None:
    a = ctx.args
    cfg = ctx.load(a.config)
    out = Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    n = int(cfg.get("level", 3))
    steps = int(cfg.get("steps", 6))
    if a.kind == "renewal":
        law = tuple(cfg.get("law", ["exponential", 1.0]))
        levels = cfg.get("levels") or [2.0 ** -(j + 1) for j in range(n)]
        rc = RenewalConfig(law, tuple(levels))
        horizon = float(cfg.get("horizon", 1e9))
        max_hits = int(cfg.get("max_hits", 100))

        def one(rng):
            return simulate_renewal(rc, horizon, n, rng, max_hits)

    elif a.kind == "splitting":
        sc = SplittingConfig(tuple(cfg.get("distances") or [2.0 ** -(j + 1) for j in range((n + 1) // 2)]))
        horizon = float(cfg.get("horizon", 1e9))
        max_hits = int(cfg.get("max_hits", 300))

        def one(rng):
            return simulate_splitting(sc, horizon, n, rng, max_hits)

    elif a.kind == "vperm":
        s = VPermPrefix.from_json(cfg)
        n = s.level
        start = int(cfg.get("start", 1))
        t = int(cfg.get("steps", 20))

        def one(rng):
            return simulate_circle_rotation(s, start, t)

    else:
        k = VtmPrefix.from_json(cfg["vtm"])
        nu = VidPrefix.from_json(cfg["vid"])
        if not check_compatibility(nu, k):
            _fail("initial marginals are not compatible with the matrices")
        n = k.level
        t = int(cfg.get("steps", 20))

        def one(rng):
            return sample_vmc(nu, k, t, rng, check=False)

    results = run_replicas(one, a.replicas, a.seed, a.threads)
    if a.kind == "generic":
        fams = results
    else:
        fams = [coupled_from_hits(tr, n, steps) for tr in results]
    with (out / "trajectories.jsonl").open("w") as fh:
        for fam in fams[: a.keep]:
            fh.write(json.dumps([p.to_json() for p in fam.paths]) + "\n")
    est = estimate_from_samples(fams, n)
    _write_estimate(out, est)
    (out / "manifest.json").write_text(json.dumps(ctx.manifest(), indent=2) + "\n")
    print(json.dumps({"ok": True, "out": str(out), "replicas": a.replicas}))


def cmd_estimate(ctx: Context) -> None:
    a = ctx.args
    k = _load_vtm(ctx, a.vtm)
    nu = _load_vid(ctx, a.vid)
    if not check_compatibility(nu, k):
        _fail("initial marginals are not compatible with the matrices")
    est = canonical_data_estimate(lambda rng: sample_vmc(nu, k, a.steps, rng, check=False), k.level, a.replicas, a.seed, a.threads)
    ctx.emit(est.to_json())


def cmd_example(ctx: Context) -> None:
    a = ctx.args
    m = a.level
    doc: dict[str, Any]
    if a.name == "ladder":
        q = LadderParams(tuple(rat(x) for x in a.q)) if a.q else LadderParams.harmonic(m)
        doc = ladder_vtm(q, m).to_json(a.convention)
        doc["vid"] = top_start_vid(m).to_json()
    elif a.name == "splitting":
        k, nu = splitting_vtm_vid(m)
        doc = k.to_json(a.convention)
        doc["vid"] = nu.to_json()
    elif a.name == "uniform":
        doc = uniform_vtm(m).to_json(a.convention)
        doc["vid"] = virtual_uniform(m).to_json()
    else:
        doc = reflecting_walk_vtm(m).to_json(a.convention)
        doc["vid"] = top_start_vid(m).to_json()
    ctx.emit(doc)


def cmd_selftest(ctx: Context) -> None:
    from .selftest import run_selftest

    results = run_selftest(seed=ctx.args.seed if ctx.args.seed is not None else 0)
    failed = [name for name, ok in results if not ok]
    for name, ok in results:
        log.info("%s: %s", name, "pass" if ok else "FAIL")
    doc = {"ok": not failed, "checks": [{"name": n, "ok": ok} for n, ok in results]}
    if failed:
        _fail("selftest failures", failed=failed)
    ctx.emit(doc)


COMMANDS: dict[str, Callable[[Context], None]] = {
    "project": cmd_project,
    "check": cmd_check,
    "check-compat": cmd_check_compat,
    "psi": cmd_psi,
    "delta-vid": cmd_delta_vid,
    "equilibrium": cmd_equilibrium,
    "birkhoff": cmd_birkhoff,
    "vperm": cmd_vperm,
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "example": cmd_example,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vmc", description="Virtual Markov chain toolkit")
    p.add_argument("--version", action="version", version=f"vmc {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("project", help="project a path or a transition matrix to a lower level")
    s.add_argument("--path")
    s.add_argument("--tm")
    s.add_argument("--level", type=int, required=True)
    s.add_argument("--out")

    s = sub.add_parser("check", help="check projectivity of a matrix prefix")
    s.add_argument("--vtm", required=True)
    s.add_argument("--out")

    s = sub.add_parser("check-compat", help="check compatibility of marginals with matrices")
    s.add_argument("--vtm", required=True)
    s.add_argument("--vid", required=True)
    s.add_argument("--out")

    s = sub.add_parser("psi", help="map a parameter sequence to compatible marginals, or back")
    s.add_argument("--vtm", required=True)
    s.add_argument("--p")
    s.add_argument("--vid")
    s.add_argument("--inverse", action="store_true")
    s.add_argument("--out")

    s = sub.add_parser("delta-vid", help="compatible marginals started at a given state")
    s.add_argument("--vtm", required=True)
    s.add_argument("--state", type=int, required=True)
    s.add_argument("--out")

    s = sub.add_parser("equilibrium", help="equilibrium family, optionally checked for stationarity")
    s.add_argument("--vtm", required=True)
    s.add_argument("--check-stationary", action="store_true")
    s.add_argument("--out")

    s = sub.add_parser("birkhoff", help="segment classification and kernel witnesses")
    bs = s.add_subparsers(dest="action", required=True)
    c = bs.add_parser("classify")
    c.add_argument("--a", required=True)
    c.add_argument("--b", required=True)
    c.add_argument("--out")
    c = bs.add_parser("kernel")
    c.add_argument("--vtm", required=True)
    c.add_argument("--out")

    s = sub.add_parser("vperm", help="virtual permutations")
    vs = s.add_subparsers(dest="action", required=True)
    c = vs.add_parser("random")
    c.add_argument("--level", type=int, required=True)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--out")
    for name in ("vtm", "check"):
        c = vs.add_parser(name)
        c.add_argument("--perms", required=True)
        c.add_argument("--out")

    s = sub.add_parser("simulate", help="Monte Carlo simulation of an example process")
    s.add_argument("kind", choices=["renewal", "splitting", "vperm", "generic"])
    s.add_argument("--config", required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--replicas", type=int, default=1000)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--keep", type=int, default=100, help="number of trajectories to save")
    s.add_argument("--out", required=True)

    s = sub.add_parser("estimate", help="estimate canonical data by sampling")
    s.add_argument("--vtm", required=True)
    s.add_argument("--vid", required=True)
    s.add_argument("--steps", type=int, default=20)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--replicas", type=int, default=1000)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--out")

    s = sub.add_parser("example", help="emit a named example as JSON")
    s.add_argument("name", choices=["ladder", "splitting", "uniform", "walk"])
    s.add_argument("--level", type=int, required=True)
    s.add_argument("--q", nargs="*", help="ladder rates q_1 .. q_{M-1} as num/den")
    s.add_argument("--convention", choices=["bracket", "pmatrix"], default="bracket")
    s.add_argument("--out")

    s = sub.add_parser("selftest", help="run the exact invariant suite")
    s.add_argument("--seed", type=int)
    s.add_argument("--out")
    return p


def dispatch(argv: Sequence[str]) -> int:
    logging.basicConfig(level=os.environ.get("VMC_LOG", "WARNING").upper(), stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.command == "simulate":
        args.out_is_dir = True
    ctx = Context(args, argv)
    try:
        COMMANDS[args.command](ctx)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"vmc: error: {e}", file=sys.stderr)
        return 2
    except ValidationFailed as e:
        print(json.dumps(e.report, indent=2))
        return 1
    except VmcError as e:
        print(json.dumps({"ok": False, "error": type(e).__name__, "message": str(e)}, indent=2))
        return 1
    except (KeyError, TypeError, ValueError) as e:
        print(f"vmc: malformed input: {e}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()

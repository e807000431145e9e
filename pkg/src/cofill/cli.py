"""Command-line front end.

Every run writes a machine-readable artifact (JSON or CSV with exact "p/q"
rationals, never floats) plus a run manifest; re-running a manifest
reproduces the artifact byte for byte.  Exit codes: 0 success (a negative
feasibility answer is still 0, with a status field), 1 mathematical negative
results from check-style commands, 2 usage errors, 3 budget exhaustion.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from typing import Dict, Optional

from . import __version__
from .cayley import build_ball
from .errors import (
    CofillError,
    EnumerationBudgetError,
    FillBudgetError,
    NotExactError,
)
from .filling import (
    FillInfeasibleError,
    cof,
    dehn_ab,
    dual_norm_check,
    fill_int,
    fill_real,
)
from .foxcalc import cycle_of_relation
from .groups import builtin_group, builtin_names, make_oracle, ORACLE_KINDS
from .oracles import OracleError
from .presentation import ParseError, Presentation, PresentationError, parse_presentation
from .primitive import (
    BoundFunction,
    CocycleData,
    FiniteComplex,
    check_condition_ii,
    check_thm4_equivalence,
    complex_primitive,
    find_primitive,
)
from .rationals import INF, parse_bound, q_str

USAGE_ERROR = 2
BUDGET_ERROR = 3


class UsageError(Exception):
    pass


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n").encode()


def _load_presentation(args) -> tuple[Presentation, object, str]:
    if args.group:
        pres, oracle = builtin_group(args.group)
        return pres, oracle, args.group
    if not args.presentation:
        raise UsageError("need --group or --presentation")
    if args.presentation == "-":
        text = sys.stdin.read()
    else:
        with open(args.presentation, "r", encoding="utf-8") as fh:
            text = fh.read()
    pres = parse_presentation(text)
    if not args.oracle:
        raise UsageError("file presentations need --oracle "
                         f"({', '.join(sorted(ORACLE_KINDS))})")
    oracle = make_oracle(args.oracle, pres)
    return pres, oracle, None


def _presentation_hash(pres: Presentation) -> str:
    text = "gens " + " ".join(pres.generators) + "\nrels " + \
        " ; ".join(pres.word_str(r) for r in pres.relators)
    return hashlib.sha256(text.encode()).hexdigest()


def _parse_mode(spec: str):
    if spec == "exhaustive":
        return "exhaustive", None, None
    if spec.startswith("sample:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise UsageError("sample mode is sample:COUNT:SEED")
        return "sample", int(parts[1]), int(parts[2])
    raise UsageError(f"unknown mode {spec!r}")


def _word_str(pres, word):
    return pres.word_str(word)


def _load_alpha0(path: str, pres: Presentation, ball) -> CocycleData:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    gen_index = {name: i for i, name in enumerate(pres.generators)}
    alpha = {}
    for word_s, gen_name, val in data:
        vid = ball.vertex_index.get(pres.parse_word(word_s))
        if vid is None:
            raise UsageError(f"alpha0 vertex {word_s!r} is outside the ball")
        if gen_name not in gen_index:
            raise UsageError(f"alpha0 generator {gen_name!r} unknown")
        alpha[(vid, gen_index[gen_name])] = parse_bound(val)
    return CocycleData(alpha)


def _load_bound(path: str, pres: Optional[Presentation], ball) -> BoundFunction:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "values" in data:
        default = parse_bound(str(data.get("default", "inf")))
        raw = data["values"]
    else:
        default = INF
        raw = data
    values: Dict[int, object] = {}
    for key, val in raw.items():
        if ball is not None:
            vid = ball.vertex_index.get(pres.parse_word(key))
            if vid is None:
                raise UsageError(f"bound vertex {key!r} is outside the ball")
        else:
            vid = int(key)
        values[vid] = parse_bound(str(val))
    return BoundFunction(values, default=default)


def _emit(args, payload_bytes: bytes, manifest: dict) -> None:
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(payload_bytes)
        with open(args.out + ".manifest.json", "wb") as fh:
            fh.write(_json_bytes(manifest))
    else:
        sys.stdout.write(payload_bytes.decode())
        if args.manifest:
            with open(args.manifest, "wb") as fh:
                fh.write(_json_bytes(manifest))


def _certificate_json(cert, ball):
    return cert.to_json(ball)


def _violations_json(violations, pres):
    return [{"base": v.base, "word": _word_str(pres, v.word),
             "lhs": q_str(v.lhs), "rhs": q_str(v.rhs)} for v in violations]


def _components_json(components, pres):
    out = []
    for c in components:
        out.append({
            "coefficient": q_str(c.coefficient),
            "base": c.base,
            "word": _word_str(pres, c.word),
            "lhs": q_str(c.lhs),
            "rhs": "inf" if c.rhs is INF else q_str(c.rhs),
            "violates": c.violates,
        })
    return out


def _run_command(args) -> tuple[bytes, int, Optional[int]]:
    """Returns (artifact bytes, exit code, seed)."""
    cmd = args.command
    if cmd == "complex-primitive":
        with open(args.complex, "r", encoding="utf-8") as fh:
            X = FiniteComplex.from_json_dict(json.load(fh))
        with open(args.cochain, "r", encoding="utf-8") as fh:
            u = {int(k): parse_bound(str(v)) for k, v in json.load(fh).items()}
        f = _load_bound(args.bound, None, None)
        try:
            res = complex_primitive(X, args.q, u, f)
        except NotExactError as exc:
            return _json_bytes({"status": "not-exact", "error": str(exc)}), 0, None
        if res.feasible:
            payload = {"status": "feasible",
                       "t": {str(c): q_str(v) for c, v in sorted(res.t.items())}}
        else:
            payload = {"status": "infeasible",
                       "farkas": [q_str(v) for v in res.farkas]}
        return _json_bytes(payload), 0, None

    pres, oracle, _ = _load_presentation(args)
    mode, count, seed = _parse_mode(args.mode)

    if cmd == "ball":
        ball = build_ball(pres, oracle, args.radius)
        return _json_bytes(ball.to_json_dict()), 0, None

    if cmd in ("fill", "dual-check"):
        if not args.word:
            raise UsageError(f"{cmd} needs --word")
        ball = build_ball(pres, oracle, args.radius)
        word = pres.parse_word(args.word)
        if cmd == "fill":
            z = cycle_of_relation(word, 0, ball)
            try:
                if args.integer:
                    report = fill_int(z, ball, budget=args.budget,
                                      check_truncation=True, word=word)
                else:
                    report = fill_real(z, ball, check_truncation=True, word=word)
            except FillInfeasibleError as exc:
                payload = {"status": "infeasible", "radius": args.radius,
                           "word": args.word,
                           "farkas_pairing": q_str(exc.pairing)}
                return _json_bytes(payload), 0, seed
            payload = {
                "status": "ok",
                "kind": "int" if args.integer else "real",
                "word": _word_str(pres, word),
                "radius": report.radius,
                "value": q_str(report.value),
                "truncated": bool(report.truncated),
                "certificate": _certificate_json(report.certificate, ball),
            }
            return _json_bytes(payload), 0, seed
        report = dual_norm_check(word, ball)
        payload = {
            "word": _word_str(pres, word),
            "radius": ball.radius,
            "primal": q_str(report.primal),
            "dual": q_str(report.dual),
            "equal": report.primal == report.dual,
            "route": report.dual_route,
            "cochain": [[ _word_str(pres, ball.vertex_words[vid]),
                          pres.generators[gen], q_str(v)]
                        for (vid, gen), v in sorted(report.cochain.items())],
        }
        return _json_bytes(payload), 0, seed

    if cmd in ("dehn", "cof"):
        if args.n is None:
            raise UsageError(f"{cmd} needs --n")
        if cmd == "dehn":
            table = dehn_ab(pres, oracle, args.n, args.radius, mode=mode,
                            count=count, seed=seed, real=args.real,
                            fill_budget=args.budget)
        else:
            table = cof(pres, oracle, args.n, args.radius, mode=mode,
                        count=count, seed=seed, fill_budget=args.budget)
        if args.format == "json":
            rows = [{"n": r.n, "value": q_str(r.value),
                     "witness": None if r.witness is None else _word_str(pres, r.witness),
                     "radius": r.radius, "truncated": r.truncated}
                    for r in table.rows]
            return _json_bytes({"kind": table.kind, "rows": rows}), 0, seed
        return table.to_csv(pres).encode(), 0, seed

    if cmd in ("primitive", "check-ii", "thm4"):
        ball = build_ball(pres, oracle, args.radius)
        cd = _load_alpha0(args.alpha0, pres, ball)
        F = _load_bound(args.bound, pres, ball)
        if cmd == "primitive":
            res = find_primitive(cd, F, ball)
            if res.feasible:
                payload = {"status": "feasible",
                           "m": {_word_str(pres, ball.vertex_words[vid]): q_str(v)
                                 for vid, v in sorted(res.m.items())}}
            else:
                payload = {"status": "infeasible",
                           "components": _components_json(res.components, pres)}
            return _json_bytes(payload), 0, seed
        if cmd == "check-ii":
            violations = check_condition_ii(cd, F, ball, args.max_len, mode=mode,
                                            count=count, seed=seed)
            payload = {"count": len(violations),
                       "violations": _violations_json(violations, pres)}
            return _json_bytes(payload), (1 if violations else 0), seed
        report = check_thm4_equivalence(cd, F, ball, args.max_len, mode=mode,
                                        count=count, seed=seed)
        payload = {
            "feasible": report.feasible,
            "agreement": report.agreement,
            "violations": _violations_json(report.violations, pres),
            "certificate_components": _components_json(report.primitive.components, pres),
            "note": report.truncation_note,
        }
        return _json_bytes(payload), (0 if report.agreement else 1), seed

    raise UsageError(f"unknown command {cmd!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cofill", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, word=False, nlen=False, maxlen=False, cocycle=False):
        p.add_argument("--group", choices=builtin_names())
        p.add_argument("--presentation", help="presentation file, or - for stdin")
        p.add_argument("--oracle", choices=sorted(ORACLE_KINDS))
        p.add_argument("--radius", type=int, default=3)
        p.add_argument("--mode", default="exhaustive",
                       help="exhaustive | sample:COUNT:SEED")
        p.add_argument("--format", choices=["json", "csv"], default=None)
        p.add_argument("--budget", type=int, default=10000)
        p.add_argument("--out", help="write artifact here (manifest alongside)")
        p.add_argument("--manifest", help="manifest path when writing to stdout")
        if word:
            p.add_argument("--word")
        if nlen:
            p.add_argument("--n", type=int)
        if maxlen:
            p.add_argument("--max-len", dest="max_len", type=int, default=8)
        if cocycle:
            p.add_argument("--alpha0", required=True, help="edge cochain JSON")
            p.add_argument("--bound", required=True, help="bound function JSON")

    common(sub.add_parser("ball", help="dump a Cayley ball"))
    fill_p = sub.add_parser("fill", help="minimal filling of a relation")
    common(fill_p, word=True)
    fill_p.add_argument("--integer", action="store_true")
    dehn_p = sub.add_parser("dehn", help="homological Dehn function table")
    common(dehn_p, nlen=True)
    dehn_p.add_argument("--real", action="store_true",
                        help="use the real relaxation instead of integer fills")
    common(sub.add_parser("cof", help="cofilling function table"), nlen=True)
    common(sub.add_parser("dual-check", help="primal/dual agreement for a relation"),
           word=True)
    common(sub.add_parser("primitive", help="bounded primitive on a ball"), cocycle=True)
    common(sub.add_parser("check-ii", help="isoperimetric condition check"),
           maxlen=True, cocycle=True)
    common(sub.add_parser("thm4", help="primitive/inequality equivalence check"),
           maxlen=True, cocycle=True)

    cp = sub.add_parser("complex-primitive", help="bounded primitive on a finite complex")
    cp.add_argument("--complex", required=True)
    cp.add_argument("--q", type=int, required=True)
    cp.add_argument("--cochain", required=True)
    cp.add_argument("--bound", required=True)
    cp.add_argument("--out")
    cp.add_argument("--manifest")
    cp.add_argument("--mode", default="exhaustive")
    cp.add_argument("--format", default=None)

    rerun = sub.add_parser("rerun", help="re-execute a run manifest")
    rerun.add_argument("manifest_path")
    rerun.add_argument("--out")
    return parser


_MANIFEST_SKIP = {"command", "out", "manifest"}


def _manifest_params(args) -> dict:
    params = {}
    for key, value in sorted(vars(args).items()):
        if key in _MANIFEST_SKIP or key == "manifest_path":
            continue
        params[key] = value
    return params


def _argv_from_manifest(manifest: dict, out: Optional[str]) -> list:
    argv = [manifest["command"]]
    for key, value in sorted(manifest["params"].items()):
        if value in (None, False):
            continue
        flag = "--" + key.replace("_", "-")
        if value is True:
            argv.append(flag)
        else:
            argv.extend([flag, str(value)])
    if out:
        argv.extend(["--out", out])
    return argv


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses code 2 for usage errors already
        return int(exc.code or 0)

    if args.command == "rerun":
        with open(args.manifest_path, "r", encoding="utf-8") as fh:
            manifest = json.load(fh)
        return main(_argv_from_manifest(manifest, args.out))

    threads = os.environ.get("COFILL_THREADS", "1")
    started = time.monotonic()
    try:
        payload, code, seed = _run_command(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ParseError, PresentationError, OracleError, FileNotFoundError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (FillBudgetError, EnumerationBudgetError) as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return BUDGET_ERROR
    except CofillError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    manifest = {
        "command": args.command,
        "params": _manifest_params(args),
        "seed": seed,
        "tool": "cofill",
        "version": __version__,
        "threads": threads,
        "wall_time_s": round(time.monotonic() - started, 6),
    }
    if getattr(args, "group", None) or getattr(args, "presentation", None):
        try:
            pres, _, _ = _load_presentation(args)
            manifest["presentation_sha256"] = _presentation_hash(pres)
        except Exception:
            pass
    _emit(args, payload, manifest)
    return code


if __name__ == "__main__":
    raise SystemExit(main())

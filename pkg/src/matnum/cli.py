"""Command-line front end: analyze, synthesize, encode, decode, decide, verify.

Exit codes: 0 ok, 2 bad input (including singular matrices and vectors that
cannot be represented), 3 numerical plan failure, 4 budget exhausted,
5 verification mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

from . import errors
from .decider import decide_equality
from .digits import DigitSet, SumAlphabet, Synthesis, synthesize_alphabet
from .encoder import AUTO, CONSTRUCTIVE, SEARCH, Representation, decode, encode
from .exactlinalg import IntMatrix, ScaledVector, char_poly
from .jordan import build_plan
from .spectrum import classify

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PLAN = 3
EXIT_BUDGET = 4
EXIT_MISMATCH = 5

DEFAULT_SEED = 0


class InputError(Exception):
    pass


@dataclass
class JobConfig:
    command: str
    matrix: IntMatrix | None
    alphabet: str | None
    strategy: str
    window: int | None
    max_terms: int
    seed: int
    out: str | None
    json_path: str | None


# ---------------------------------------------------------------- io helpers

def _load_json_arg(text: str):
    """Inline JSON, or the contents of a file path."""
    p = Path(text)
    if p.exists():
        return json.loads(p.read_text())
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"neither a file nor valid JSON: {text!r}") from exc


def parse_matrix(text: str) -> IntMatrix:
    data = _load_json_arg(text)
    if isinstance(data, dict):
        data = data.get("matrix")
    try:
        return IntMatrix(data)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad matrix: {exc}") from exc


def parse_vector(text: str) -> list[int]:
    text = text.strip()
    try:
        if text.startswith("["):
            vals = json.loads(text)
        else:
            vals = [int(v) for v in text.split(",")]
        return [int(v) for v in vals]
    except (ValueError, json.JSONDecodeError) as exc:
        raise InputError(f"bad vector: {text!r}") from exc


def write_atomic(path: str, text: str) -> None:
    path = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit_json(cfg: JobConfig, report: dict) -> None:
    if cfg.json_path is None:
        return
    if cfg.json_path == "-":
        sys.stdout.write(_dump(report))
    else:
        write_atomic(cfg.json_path, _dump(report))


def load_alphabet(source: str | None, M: IntMatrix, seed: int):
    """Returns (alphabet, synthesis or None)."""
    if source is None or source == "synthesize":
        S = synthesize_alphabet(M, seed=seed)
        return S.alphabet, S
    data = _load_json_arg(source)
    if isinstance(data, list):
        return DigitSet.from_dict(data), None
    fmt = data.get("format") or data.get("type")
    if fmt == "matnum.alphabet":
        if data["matrix"] != M.tolist():
            raise errors.AlphabetMismatch("alphabet file was synthesised for another matrix")
        S = synthesize_alphabet(M, seed=data.get("seed", seed))
        if S.to_dict()["alphabet"] != data["alphabet"]:
            raise errors.AlphabetMismatch("alphabet file does not match a fresh synthesis")
        return S.alphabet, S
    if fmt == "sum":
        return SumAlphabet.from_dict(data), None
    if fmt == "digit-set":
        return DigitSet.from_dict(data), None
    raise InputError("unrecognised alphabet format")


def _alphabet_from_rep_file(data):
    a = data.get("alphabet")
    if a is None:
        return None
    if isinstance(a, list):
        return DigitSet.from_dict(a)
    if a.get("type") == "sum":
        return SumAlphabet.from_dict(a)
    return DigitSet.from_dict(a)


def _target(args, M: IntMatrix) -> ScaledVector:
    if args.vector is None:
        raise InputError("--vector is required")
    v = parse_vector(args.vector)
    if len(v) != M.dim:
        raise InputError(f"vector has length {len(v)}, matrix has dimension {M.dim}")
    return ScaledVector(tuple(v), args.denominator_exp or 0, M.det)


def _require_matrix(cfg: JobConfig) -> IntMatrix:
    if cfg.matrix is None:
        raise InputError("--matrix is required")
    if cfg.matrix.det == 0:
        raise errors.SingularMatrix("matrix is singular")
    return cfg.matrix


# ---------------------------------------------------------------- commands

def cmd_analyze(cfg: JobConfig, args) -> int:
    M = _require_matrix(cfg)
    p = char_poly(M)
    split = classify(p)
    verdict = decide_equality(M)
    report = {"matrix": M.tolist(), "det": M.det, "char_poly": str(p),
              "char_poly_coeffs": list(p.coeffs), "spectrum": split.to_dict(),
              "verdict": verdict.to_dict()}
    lines = [f"matrix {M.tolist()}", f"Δ={M.det}", f"char poly {p}",
             f"dims {tuple(split.dims)}"]
    for kind, roots in (("expanding", split.expanding), ("contracting", split.contracting)):
        for lam, mult in roots:
            lines.append(f"{kind} λ≈{_fmt(lam)} (multiplicity {mult})")
    for lam, mult, is_real, angle in split.unimodular:
        lines.append(f"unimodular λ≈{_fmt(lam)} φ={angle:.6f} (multiplicity {mult})")
    try:
        plan = build_plan(M, seed=cfg.seed)
        report["jordan"] = {"residual": plan.residual, "alpha": plan.alpha,
                            "certified": plan.closeness,
                            "blocks": [b.to_dict() for b in plan.blocks]}
        lines.append(f"Jordan residual {plan.residual:.3e}, alpha {plan.alpha:.6g}, "
                     f"closeness {'certified' if plan.closeness else 'not certified'}")
    except errors.JordanUnstable as exc:
        report["jordan"] = {"error": str(exc)}
        lines.append(f"Jordan plan unstable: {exc}")
    lines.append(f"verdict {verdict}")
    print("\n".join(lines))
    _emit_json(cfg, report)
    return EXIT_OK


def _fmt(z: complex) -> str:
    if abs(z.imag) < 1e-15:
        return f"{z.real:.6g}"
    return f"{z.real:.6g}{z.imag:+.6g}i"


def cmd_synthesize(cfg: JobConfig, args) -> int:
    M = _require_matrix(cfg)
    S = synthesize_alphabet(M, seed=cfg.seed)
    doc = S.to_dict()
    text = _dump(doc)
    if cfg.out:
        write_atomic(cfg.out, text)
    else:
        sys.stdout.write(text)
    print(f"synthesised alphabet: {len(S.lattice_digits)} base digits, C={S.C:.6g}, "
          f"alpha={S.plan.alpha:.6g}", file=sys.stderr if not cfg.out else sys.stdout)
    _emit_json(cfg, {"base_digits": len(S.lattice_digits), "C": S.C, "alpha": S.plan.alpha,
                     "alphabet_id": S.alphabet.alphabet_id})
    return EXIT_OK


def cmd_encode(cfg: JobConfig, args) -> int:
    M = _require_matrix(cfg)
    z = _target(args, M)
    alphabet, S = load_alphabet(cfg.alphabet, M, cfg.seed)
    rep, trace = encode(M, z, alphabet, synthesis=S, strategy=cfg.strategy,
                        window=cfg.window, max_terms=cfg.max_terms)
    doc = rep.to_dict(M, alphabet)
    if cfg.out:
        write_atomic(cfg.out, _dump(doc))
    print(f"{z} = {rep}")
    print("trace " + json.dumps(trace.summary(), sort_keys=True))
    _emit_json(cfg, {"representation": doc, "trace": trace.summary()})
    return EXIT_OK


def _load_rep(path: str):
    data = _load_json_arg(path)
    if not isinstance(data, dict) or "terms" not in data:
        raise InputError("not a representation file")
    return data, Representation.from_dict(data), _alphabet_from_rep_file(data)


def cmd_decode(cfg: JobConfig, args) -> int:
    if not args.representation:
        raise InputError("a representation file is required")
    data, rep, alphabet = _load_rep(args.representation)
    M = cfg.matrix or parse_matrix(json.dumps(data.get("matrix")))
    v = decode(M, rep, alphabet)
    print(str(v))
    _emit_json(cfg, {"value": v.to_dict()})
    return EXIT_OK


def cmd_decide(cfg: JobConfig, args) -> int:
    M = _require_matrix(cfg)
    verdict = decide_equality(M)
    print(f"Δ={M.det} verdict {verdict}")
    _emit_json(cfg, verdict.to_dict())
    return EXIT_OK


def cmd_verify(cfg: JobConfig, args) -> int:
    if not args.representation:
        raise InputError("a representation file is required")
    data, rep, alphabet = _load_rep(args.representation)
    M = cfg.matrix or parse_matrix(json.dumps(data.get("matrix")))
    target = _target(args, M)
    try:
        v = decode(M, rep, alphabet)
    except errors.AlphabetMismatch as exc:
        print(f"mismatch: {exc}")
        _emit_json(cfg, {"match": False, "reason": str(exc)})
        return EXIT_MISMATCH
    ok = v == target
    print(f"{'match' if ok else 'mismatch'}: decoded {v}, expected {target}")
    _emit_json(cfg, {"match": ok, "decoded": v.to_dict(), "expected": target.to_dict()})
    return EXIT_OK if ok else EXIT_MISMATCH


COMMANDS = {"analyze": cmd_analyze, "synthesize": cmd_synthesize, "encode": cmd_encode,
            "decode": cmd_decode, "decide": cmd_decide, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="matnum", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("representation", nargs="?", help="representation file (decode, verify)")
    ap.add_argument("--matrix", help="JSON rows, e.g. [[2,1],[2,2]], or a file")
    ap.add_argument("--alphabet", help='digit file, inline JSON list, or "synthesize"')
    ap.add_argument("--vector", help="integer numerator, e.g. 3,5 or [3,5]")
    ap.add_argument("--denominator-exp", type=int, default=0,
                    help="k in num / det(M)^k (default 0)")
    ap.add_argument("--strategy", choices=[AUTO, CONSTRUCTIVE, SEARCH], default=AUTO)
    ap.add_argument("--window", type=int, default=None, help="search exponent window [-w, w]")
    ap.add_argument("--max-terms", type=int, default=12)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--out", help="output file (written atomically)")
    ap.add_argument("--json", dest="json_path", help='machine-readable report path, "-" for stdout')
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        matrix = parse_matrix(args.matrix) if args.matrix else None
        cfg = JobConfig(args.command, matrix, args.alphabet, args.strategy, args.window,
                        args.max_terms, args.seed, args.out, args.json_path)
        return COMMANDS[args.command](cfg, args)
    except (InputError, errors.SingularMatrix, errors.NotRepresentableError,
            errors.AlphabetMismatch, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (errors.JordanUnstable, errors.ClassificationBudgetExceeded,
            errors.CloseLatticeViolation) as exc:
        print(f"numerical plan failure: {exc}", file=sys.stderr)
        return EXIT_PLAN
    except (errors.EncodeBudgetExceeded, errors.EnumerationCapExceeded,
            errors.FactorizationLimit) as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())

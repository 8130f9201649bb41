"""Command line front end for evaluation and identity certification.

Thin client over the service handlers: the default path calls them in
process, and --server URL sends the same payloads to a running instance
over HTTP instead.  Exit codes: 0 on success (for certifications:
converged and rel_err within --tol), 1 when a certification fails its
criterion or an assignment is rejected, 2 on malformed flags or config.
"""

from __future__ import annotations

import argparse
import json
import sys

import httpx
from pydantic import ValidationError

from .errors import (ConstraintViolation, DomainError, SamplingExhausted,
                     ShapeError, UnknownSymbol)
from .service.app import (run_beta, run_gamma, run_pochhammer, run_tree,
                          run_verify)
from .service.models import (BetaRequest, GammaRequest, PochhammerRequest,
                             TreeRequest, VerifyRequest)
from .bailey import TreeWord

DEFAULT_PASS_TOL = 1e-6

_ENDPOINTS = {
    "gamma": (GammaRequest, run_gamma),
    "pochhammer": (PochhammerRequest, run_pochhammer),
    "beta": (BetaRequest, run_beta),
    "verify": (VerifyRequest, run_verify),
    "tree": (TreeRequest, run_tree),
}

# per identity kind: length of --t, #s-names, #u-names, needs --w
_PARAM_SHAPES = {
    "beta": (5, 0, 0, False),
    "transformation": (4, 3, 0, False),
    "id-seq": (4, None, None, True),
    "ident1": (4, 2, 2, True),
    "identfin": (4, None, None, True),
}


class CliError(Exception):
    """Flag or config problem; maps to exit code 2."""


def parse_complex(text) -> complex:
    """Accept bare reals and "a+bi" (or "a+bj") forms."""
    if isinstance(text, (int, float)):
        return complex(text)
    s = str(text).strip().replace(" ", "").replace("I", "i")
    s = s.replace("J", "j").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise CliError(f"cannot parse complex value {text!r}") from None


def parse_complex_list(value) -> list[complex]:
    if isinstance(value, str):
        parts = [p for p in value.split(",") if p.strip()]
    elif isinstance(value, (list, tuple)):
        parts = list(value)
    else:
        raise CliError(f"expected a comma-separated list, got {value!r}")
    return [parse_complex(p) for p in parts]


def _pair(z: complex) -> list[float]:
    return [z.real, z.imag]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ellbailey",
        description="Evaluate elliptic gamma quantities and certify "
                    "integral identities.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", help="base parameter q, |q| < 1")
    common.add_argument("--p", help="base parameter p, |p| < 1")
    common.add_argument("--seed", type=int,
                        help="draw the assignment from this seed")
    common.add_argument("--tol", type=float,
                        help=f"pass criterion on rel_err "
                             f"(default {DEFAULT_PASS_TOL:g})")
    common.add_argument("--n-max", dest="n_max", type=int,
                        help="cap on quadrature nodes per dimension")
    common.add_argument("--json", action="store_true", dest="json_out",
                        help="emit the JSON report instead of a summary")
    common.add_argument("--config", help="JSON file supplying missing flags "
                                         "(a flag given both ways is an error)")
    common.add_argument("--server", help="base URL of a running service; "
                                         "default is in-process execution")

    sub = parser.add_subparsers(dest="command", required=True)
    g = sub.add_parser("gamma", parents=[common],
                       help="evaluate the elliptic gamma function")
    g.add_argument("--z", help="argument z")
    po = sub.add_parser("pochhammer", parents=[common],
                        help="evaluate the infinite q-Pochhammer product")
    po.add_argument("--z", help="argument of the product")
    b = sub.add_parser("beta", parents=[common],
                       help="certify the five-parameter integral evaluation")
    b.add_argument("--t", help="five comma-separated parameter values")
    v = sub.add_parser("verify", parents=[common],
                       help="certify one named identity")
    v.add_argument("identity",
                   help="beta, transformation, id-seq[:m], ident1, "
                        "identfin[:m]")
    v.add_argument("--m", type=int, help="iteration depth for the "
                                         "depth-indexed identities")
    v.add_argument("--t", help="comma-separated t-type values")
    v.add_argument("--s", help="comma-separated s-type values")
    v.add_argument("--u", help="comma-separated u-type values")
    v.add_argument("--w", help="external point on the unit circle")
    tr = sub.add_parser("tree", parents=[common],
                        help="check pair closure for a composition word")
    tr.add_argument("--word", help='word like "C(s1,u1);D(s2,u2)"')
    tr.add_argument("--t", help="four comma-separated seed values "
                                "(t, t0, t1, t2)")
    tr.add_argument("--s", help="s-values for the letters, in word order")
    tr.add_argument("--u", help="u-values for the letters, in word order")
    tr.add_argument("--w", help="external point on the unit circle")
    return parser


def _apply_config(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    try:
        with open(args.config) as fh:
            loaded = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {args.config!r}: {exc}") from None
    if not isinstance(loaded, dict):
        raise CliError("config must be a JSON object of flag values")
    for key, value in loaded.items():
        name = key.replace("-", "_")
        if name == "json":
            name = "json_out"
        if not hasattr(args, name) or name in ("config", "server", "command"):
            raise CliError(f"unknown config key {key!r}")
        current = getattr(args, name)
        if current is not None and current is not False:
            raise CliError(f"{key!r} given both on the command line and in "
                           f"{args.config!r}")
        setattr(args, name, value)


def _require(args: argparse.Namespace, *names: str) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            raise CliError(f"missing --{name.replace('_', '-')} "
                           f"for command {args.command!r}")


def _base_fields(args) -> dict:
    _require(args, "q", "p")
    return {"q": _pair(parse_complex(args.q)),
            "p": _pair(parse_complex(args.p))}


def _identity_id(args) -> str:
    identity = args.identity
    if args.m is not None:
        if ":" in identity:
            raise CliError("give the depth either inside the identity id "
                           "or with --m, not both")
        if identity not in ("id-seq", "identfin"):
            raise CliError(f"--m does not apply to identity {identity!r}")
        identity = f"{identity}:{args.m}"
    kind = identity.split(":", 1)[0]
    if kind not in _PARAM_SHAPES:
        raise CliError(f"unknown identity {identity!r}")
    return identity


def _explicit_assignment(identity_id: str, args) -> dict | None:
    given = [name for name in ("t", "s", "u", "w")
             if getattr(args, name, None) is not None]
    if not given:
        return None
    if args.seed is not None:
        raise CliError("give explicit parameter values or --seed, not both")
    kind, _, tail = identity_id.partition(":")
    n_t, n_s, n_u, needs_w = _PARAM_SHAPES[kind]
    if kind == "id-seq":
        n_s = n_u = int(tail or "1")
    elif kind == "identfin":
        n_s = n_u = int(tail or "1") + 1

    params: dict[str, list[float]] = {}
    varmap: dict[str, list[float]] = {}

    def take(flag: str, count: int, names: list[str]) -> None:
        if count == 0:
            if getattr(args, flag, None) is not None:
                raise CliError(f"--{flag} does not apply to {identity_id!r}")
            return
        if getattr(args, flag, None) is None:
            raise CliError(f"missing --{flag} for {identity_id!r}")
        values = parse_complex_list(getattr(args, flag))
        if len(values) != count:
            raise CliError(f"--{flag} needs {count} values for "
                           f"{identity_id!r}, got {len(values)}")
        for name, value in zip(names, values):
            params[name] = _pair(value)

    if kind == "beta":
        take("t", 5, [f"t{m}" for m in range(5)])
        take("s", 0, [])
        take("u", 0, [])
    elif kind == "transformation":
        take("t", 4, ["t", "t1", "t2", "t3"])
        take("s", 3, ["s1", "s2", "s3"])
        take("u", 0, [])
    else:
        take("t", 4, ["t", "t0", "t1", "t2"])
        take("s", n_s, [f"s{k}" for k in range(1, n_s + 1)])
        take("u", n_u, [f"u{k}" for k in range(1, n_u + 1)])
    if needs_w:
        if getattr(args, "w", None) is None:
            raise CliError(f"missing --w for {identity_id!r}")
        varmap["w"] = _pair(parse_complex(args.w))
    elif getattr(args, "w", None) is not None:
        raise CliError(f"--w does not apply to {identity_id!r}")
    return {"params": params, "vars": varmap}


def _tree_assignment(word_text: str, args) -> dict | None:
    given = [name for name in ("t", "s", "u", "w")
             if getattr(args, name, None) is not None]
    if not given:
        return None
    if args.seed is not None:
        raise CliError("give explicit parameter values or --seed, not both")
    try:
        word = TreeWord.parse(word_text)
    except (DomainError, ShapeError) as exc:
        raise CliError(str(exc)) from None
    params: dict[str, list[float]] = {}
    values = parse_complex_list(args.t) if args.t is not None else None
    if values is None or len(values) != 4:
        raise CliError("--t needs 4 values (t, t0, t1, t2) for tree words")
    for name, value in zip(("t", "t0", "t1", "t2"), values):
        params[name] = _pair(value)
    for flag, index in (("s", 1), ("u", 2)):
        raw = getattr(args, flag, None)
        if len(word.letters) == 0:
            if raw is not None:
                raise CliError(f"--{flag} does not apply to the empty word")
            continue
        if raw is None:
            raise CliError(f"missing --{flag} for word {word_text!r}")
        values = parse_complex_list(raw)
        if len(values) != len(word.letters):
            raise CliError(f"--{flag} needs one value per letter "
                           f"({len(word.letters)}), got {len(values)}")
        for letter, value in zip(word.letters, values):
            params[letter[index]] = _pair(value)
    if args.w is None:
        raise CliError("missing --w for tree words")
    return {"params": params, "vars": {"w": _pair(parse_complex(args.w))}}


def _build_payload(args) -> tuple[str, dict]:
    command = args.command
    if command == "gamma":
        _require(args, "z")
        payload = _base_fields(args)
        payload["z"] = _pair(parse_complex(args.z))
        return "gamma", payload
    if command == "pochhammer":
        _require(args, "q", "z")
        return "pochhammer", {"q": _pair(parse_complex(args.q)),
                              "a": _pair(parse_complex(args.z))}

    payload = _base_fields(args)
    if args.n_max is not None:
        payload["n_max"] = args.n_max
    if command == "beta":
        if args.t is not None:
            if args.seed is not None:
                raise CliError("give --t or --seed, not both")
            values = parse_complex_list(args.t)
            if len(values) != 5:
                raise CliError(f"--t needs 5 values, got {len(values)}")
            payload["t"] = [_pair(v) for v in values]
        elif args.seed is not None:
            payload["seed"] = args.seed
        return "beta", payload
    if command == "verify":
        identity_id = _identity_id(args)
        payload["identity_id"] = identity_id
        assignment = _explicit_assignment(identity_id, args)
        if assignment is not None:
            payload["assignment"] = assignment
        elif args.seed is not None:
            payload["seed"] = args.seed
        return "verify", payload
    if command == "tree":
        _require(args, "word")
        payload["word"] = args.word
        assignment = _tree_assignment(args.word, args)
        if assignment is not None:
            payload["assignment"] = assignment
        elif args.seed is not None:
            payload["seed"] = args.seed
        return "tree", payload
    raise CliError(f"unknown command {command!r}")


def call_in_process(endpoint: str, payload: dict) -> tuple[int, dict]:
    model, handler = _ENDPOINTS[endpoint]
    try:
        return 200, handler(model(**payload)).model_dump()
    except ValidationError as exc:
        return 422, {"error": "invalid-request", "detail": str(exc)}
    except ConstraintViolation as exc:
        return 409, {"error": "constraint-violation", "detail": str(exc)}
    except SamplingExhausted as exc:
        return 409, {"error": "sampling-exhausted", "detail": str(exc)}
    except DomainError as exc:
        return 422, {"error": "domain", "detail": str(exc)}
    except ShapeError as exc:
        return 422, {"error": "shape", "detail": str(exc)}
    except UnknownSymbol as exc:
        return 422, {"error": "unknown-symbol", "detail": str(exc)}


def call_server(server: str, endpoint: str, payload: dict) -> tuple[int, dict]:
    with httpx.Client(base_url=server, timeout=600.0) as client:
        response = client.post(f"/{endpoint}", json=payload)
        try:
            body = response.json()
        except ValueError:
            body = {"error": "bad-response", "detail": response.text}
        return response.status_code, body


def _format_complex(pair_or_value) -> str:
    if isinstance(pair_or_value, (list, tuple)):
        value = complex(pair_or_value[0], pair_or_value[1])
    else:
        value = complex(pair_or_value)
    if value.imag == 0:
        return f"{value.real:.12g}"
    return f"{value.real:.12g}{value.imag:+.12g}i"


def _emit(body: dict, as_json: bool, stream=None) -> None:
    stream = stream or sys.stdout
    if as_json:
        print(json.dumps(body, indent=2, sort_keys=True), file=stream)
        return
    if "error" in body:
        print(f"error ({body['error']}): {body['detail']}", file=stream)
    elif "value" in body:
        print(f"value = {_format_complex(body['value'])}", file=stream)
    elif "identity_id" in body:
        print(f"identity {body['identity_id']}", file=stream)
        print(f"  lhs = {_format_complex(body['lhs'])}", file=stream)
        print(f"  rhs = {_format_complex(body['rhs'])}", file=stream)
        print(f"  abs_err = {body['abs_err']:.6g}  "
              f"rel_err = {body['rel_err']:.6g}", file=stream)
        print(f"  nodes = {body['nodes_used']}  "
              f"converged = {body['converged']}  "
              f"runtime_ms = {body['runtime_ms']:.1f}", file=stream)
    elif "word" in body:
        print(f"word {body['word'] or '(empty)'}", file=stream)
        print(f"  beta = {_format_complex(body['beta'])}", file=stream)
        print(f"  residual = {_format_complex(body['residual'])}  "
              f"rel_residual = {body['rel_residual']:.6g}", file=stream)
        print(f"  converged = {body['converged']}  "
              f"runtime_ms = {body['runtime_ms']:.1f}", file=stream)
    else:
        print(json.dumps(body, indent=2, sort_keys=True), file=stream)


def _passes(endpoint: str, body: dict, tol: float) -> bool:
    if endpoint in ("gamma", "pochhammer"):
        return True
    if endpoint == "tree":
        return bool(body["converged"]) and body["rel_residual"] <= tol
    return bool(body["converged"]) and body["rel_err"] <= tol


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        _apply_config(args)
        endpoint, payload = _build_payload(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    tol = args.tol if args.tol is not None else DEFAULT_PASS_TOL
    if args.server:
        status, body = call_server(args.server, endpoint, payload)
    else:
        status, body = call_in_process(endpoint, payload)
    as_json = bool(args.json_out)
    if status == 200:
        _emit(body, as_json)
        if _passes(endpoint, body, tol):
            return 0
        if not as_json:
            print(f"FAIL: tolerance {tol:g} not met or not converged")
        return 1
    if status == 409:
        _emit(body, as_json)
        return 1
    _emit(body, as_json, stream=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())

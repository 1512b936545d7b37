"""Command line front end: ``wco <command> --config file.json [--out dir] [--seed k] [--degree D]``.

The config is a single JSON document::

    {"space": {"N": 2, "gamma": 1},
     "automorphism": {"type": "canonical", "s": 0.5, "U": [[1]]},
     "symbol": {"terms": [[[0, 0], 2, 0], [[1, 0], 1, 0]]},
     "degree": 20, "lambda": [0.5, 0.5]}

Complex numbers are written as ``x`` or ``[re, im]``.  Every output carries the
library version and the SHA-256 of the canonical (sorted, compact) config after
flag overrides.  Exit codes: 0 ok, 1 invalid config or out-of-scope input,
2 numerical contract failure.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .automorphism import (
    Kind,
    canonical_hyperbolic,
    classify,
    from_involution,
    from_matrix,
    parabolic_from_siegel,
    parabolic_translation,
    rotation,
)
from .constructions import adjoint_eigenvector, forward_eigenfunction, parabolic_approx_eigenvector
from .errors import (
    AmbiguousClassification,
    ConfigError,
    DomainError,
    EigensolverError,
    NotInvertible,
    SearchError,
    TruncationError,
    UnsupportedCase,
)
from .geometry import e1
from .operator import build_matrix, eigenvalues
from .space import SpaceParams
from .spectrum import predict
from .symbol import DEFAULT_SAMPLES, Symbol, cocycle_sup_growth
from . import verify as verify_mod

COMMANDS = (
    "classify",
    "predict",
    "truncate",
    "eigs",
    "cocycle-limit",
    "witness-forward",
    "witness-adjoint",
    "witness-parabolic",
    "verify",
    "scatter",
)

DEFAULTS = {"degree": 20, "seed": 0, "samples": DEFAULT_SAMPLES, "n_max": 200, "K_terms": 40, "J_terms": 40, "m": 25}


class ContractFailure(Exception):
    """A computation finished but its numerical guarantee did not hold."""

    def __init__(self, message, payload):
        super().__init__(message)
        self.payload = payload


# -- config parsing -------------------------------------------------------------


def _complex(x, what: str) -> complex:
    if isinstance(x, bool):
        raise ConfigError(f"{what}: expected a number, got a boolean")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise ConfigError(f"{what}: expected a number or [re, im], got {x!r}")


def _complex_array(x, ndim: int, what: str) -> np.ndarray:
    if ndim == 0:
        return np.asarray(_complex(x, what))
    if not isinstance(x, list):
        raise ConfigError(f"{what}: expected a list")
    return np.array([_complex_array(v, ndim - 1, what) for v in x], dtype=complex)


def _real(x, what: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError(f"{what}: expected a real number, got {x!r}")
    return float(x)


def _int(x, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ConfigError(f"{what}: expected an integer, got {x!r}")
    return x


def _section(cfg, key) -> dict:
    sec = cfg.get(key)
    if not isinstance(sec, dict):
        raise ConfigError(f"missing or malformed '{key}' section")
    return sec


def parse_space(cfg) -> SpaceParams:
    sec = _section(cfg, "space")
    return SpaceParams(_int(sec.get("N"), "space.N"), _real(sec.get("gamma", 1.0), "space.gamma"))


def _unitary_block(sec, N: int):
    if "U" not in sec or N == 1:
        return None
    U = sec["U"]
    if isinstance(U, list) and U and isinstance(U[0], list):
        return _complex_array(U, 2, "automorphism.U")
    # a bare scalar is the 1x1 block for N = 2
    return np.array([[_complex(U, "automorphism.U")]])


def parse_automorphism(cfg, N: int):
    sec = _section(cfg, "automorphism")
    kind = str(sec.get("type", "")).replace("-", "_")
    if kind == "canonical":
        return canonical_hyperbolic(_real(sec.get("s"), "automorphism.s"), _unitary_block(sec, N), N)
    if kind == "involution_conjugated":
        chi = from_involution(_complex_array(sec.get("a"), 1, "automorphism.a"))
        inner = canonical_hyperbolic(_real(sec.get("s"), "automorphism.s"), _unitary_block(sec, N), N)
        return chi.compose(inner).compose(chi)
    if kind == "parabolic_translation":
        t = sec.get("t", sec.get("a", 1.0))
        return parabolic_translation(N, _real(t, "automorphism.t"))
    if kind == "parabolic_siegel":
        return parabolic_from_siegel(_complex_array(sec.get("a"), 1, "automorphism.a"), _unitary_block(sec, N))
    if kind == "rotation":
        angles = [_real(v, "automorphism.angles") for v in sec.get("angles", [])]
        return rotation(angles)
    if kind == "matrix":
        return from_matrix(_complex_array(sec.get("matrix"), 2, "automorphism.matrix"))
    raise ConfigError(f"unknown automorphism type {sec.get('type')!r}")


def parse_symbol(cfg, N: int) -> Symbol:
    sec = cfg.get("symbol", {"constant": 1.0})
    if not isinstance(sec, dict):
        raise ConfigError("malformed 'symbol' section")
    if "terms" in sec:
        terms = {}
        for t in sec["terms"]:
            if not isinstance(t, list) or len(t) not in (2, 3) or not isinstance(t[0], list):
                raise ConfigError(f"symbol term must be [[exponents], re, im] or [[exponents], c], got {t!r}")
            alpha = tuple(_int(v, "symbol exponent") for v in t[0])
            if len(alpha) != N or min(alpha, default=0) < 0:
                raise ConfigError(f"symbol exponent {list(alpha)} does not fit N={N}")
            c = complex(_real(t[1], "symbol re"), _real(t[2], "symbol im")) if len(t) == 3 else _complex(t[1], "symbol coefficient")
            terms[alpha] = terms.get(alpha, 0.0) + c
        return Symbol.from_terms(N, terms)
    if "constant" in sec:
        return Symbol.constant(N, _complex(sec["constant"], "symbol.constant"))
    raise ConfigError("symbol needs 'terms' or 'constant'")


def apply_overrides(cfg: dict, args) -> dict:
    cfg = dict(cfg)
    for key in ("seed", "degree", "samples", "n_max", "m", "K_terms", "J_terms"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if getattr(args, "lam", None) is not None:
        cfg["lambda"] = [args.lam[0], args.lam[1]]
    return cfg


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


def _knob(cfg, key, kind=int):
    v = cfg.get(key, DEFAULTS.get(key))
    if v is None:
        raise ConfigError(f"missing '{key}'")
    return _int(v, key) if kind is int else _real(v, key)


def _lambda(cfg) -> complex:
    if "lambda" not in cfg:
        raise ConfigError("missing 'lambda'")
    return _complex(cfg["lambda"], "lambda")


# -- serialisation -------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [_jsonable(float(x.real)), _jsonable(float(x.imag))]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x + 0.0 if np.isfinite(x) else str(x)  # + 0.0 drops the sign of zero
    if hasattr(x, "value") and isinstance(getattr(x, "value"), str):
        return x.value
    return x


def _json_doc(command, cfg_hash, result) -> str:
    doc = {"command": command, "version": __version__, "config_sha256": cfg_hash, "result": _jsonable(result)}
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _csv_doc(cfg_hash, header, rows, extra=()) -> str:
    buf = io.StringIO()
    buf.write(f"# wco {__version__} config_sha256={cfg_hash}\n")
    for line in extra:
        buf.write(f"# {line}\n")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else f"{v:.17g}" for v in row) + "\n")
    return buf.getvalue()


# -- commands -------------------------------------------------------------------


def _problem(cfg):
    sp = parse_space(cfg)
    phi = parse_automorphism(cfg, sp.N)
    if phi.N != sp.N:
        raise ConfigError(f"automorphism acts on C^{phi.N} but space.N = {sp.N}")
    psi = parse_symbol(cfg, sp.N)
    return sp, phi, psi


def run(command: str, cfg: dict, cfg_hash: str | None = None) -> dict:
    """Execute a command; returns ``{filename: text}`` artifacts.

    Raises the library's exceptions for invalid input and ``ContractFailure``
    when a numerical guarantee fails.
    """
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    h = cfg_hash or config_hash(cfg)
    seed = _knob(cfg, "seed")

    if command == "verify":
        if "automorphism" in cfg:
            sp, phi, psi = _problem(cfg)
            results = verify_mod.run_suite(psi, phi, sp, seed=seed)
        else:
            results = verify_mod.run_suite(seed=seed)
        report = verify_mod.summarize(results)
        text = _json_doc(command, h, report)
        if not report["passed"]:
            raise ContractFailure("invariant suite failed", {"verify.json": text})
        return {"verify.json": text}

    sp, phi, psi = _problem(cfg)

    if command == "classify":
        return {"classify.json": _json_doc(command, h, classify(phi).to_dict())}

    if command == "predict":
        return {"predict.json": _json_doc(command, h, predict(psi, phi, sp).to_dict())}

    if command in ("truncate", "eigs", "scatter"):
        T = build_matrix(psi, phi, sp, _knob(cfg, "degree"))
        if command == "truncate":
            header = f"# wco {__version__} config_sha256={h}\n"
            return {"truncate.json": _json_doc(command, h, T.to_dict()), "truncate.csv": header + T.to_csv()}
        ev = eigenvalues(T)
        if command == "eigs":
            return {"eigs.csv": _csv_doc(h, ["re", "im"], [(v.real, v.imag) for v in ev])}
        p = predict(psi, phi, sp)
        rows = [("eig", v.real, v.imag) for v in ev]
        rows += [("r_min", p.r_min, 0.0), ("r_max", p.r_max, 0.0)]
        return {"scatter.csv": _csv_doc(h, ["kind", "re", "im"], rows, [f"shape={p.shape.value}"])}

    if command == "cocycle-limit":
        rep = classify(phi)
        n_max = _knob(cfg, "n_max")
        r = cocycle_sup_growth(psi, phi, n_max, _knob(cfg, "samples"), seed)
        a = rep.denjoy_wolff
        limit = abs(complex(psi(a)))
        if rep.kind is Kind.HYPERBOLIC:
            limit = max(limit, abs(complex(psi(rep.repelling))))
        rel = abs(r[-1] - limit) / limit
        csv = _csv_doc(h, ["n", "r_n"], [(str(n), v) for n, v in enumerate(r, start=1)], [f"predicted_limit={limit:.17g}"])
        summary = {"predicted_limit": limit, "r_final": float(r[-1]), "n_max": n_max, "relative_gap": rel, "kind": rep.kind.value}
        return {"cocycle-limit.csv": csv, "cocycle-limit.json": _json_doc(command, h, summary)}

    if command == "witness-forward":
        w = forward_eigenfunction(psi, phi, sp, _lambda(cfg), _knob(cfg, "K_terms"), _knob(cfg, "degree"))
        return _witness_artifacts(command, h, w, cfg)
    if command == "witness-adjoint":
        w = adjoint_eigenvector(psi, phi, sp, _lambda(cfg), _knob(cfg, "J_terms"))
        return _witness_artifacts(command, h, w, cfg)
    # witness-parabolic
    lam = _lambda(cfg) if "lambda" in cfg else complex(psi(e1(sp.N)))
    w = parabolic_approx_eigenvector(psi, phi, sp, lam, _knob(cfg, "m"))
    out = _witness_artifacts(command, h, w, cfg)
    if not w.details["bound_holds"]:
        raise ContractFailure("residual bound violated", out)
    return out


def _witness_artifacts(command, h, w, cfg) -> dict:
    out = {f"{command}.json": _json_doc(command, h, w.to_dict())}
    tol = cfg.get("residual_tol")
    if tol is not None and not w.residual <= _real(tol, "residual_tol"):
        raise ContractFailure(f"residual {w.residual:.3g} exceeds residual_tol {tol}", out)
    if any(d.startswith("degenerate") for d in w.diagnostics):
        raise ContractFailure("degenerate witness", out)
    return out


# -- entry point ------------------------------------------------------------------

VALIDATION = (ConfigError, DomainError, json.JSONDecodeError)
SCOPE = (UnsupportedCase, NotInvertible)
NUMERICAL = (AmbiguousClassification, SearchError, EigensolverError, TruncationError)


def _error(category: str, exc: Exception) -> dict:
    err = {"category": category, "error": type(exc).__name__, "message": str(exc)}
    for attr in ("gaps", "best"):
        if getattr(exc, attr, None) is not None:
            err[attr] = _jsonable(getattr(exc, attr))
    return err


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wco", description="Spectra of weighted composition operators on the unit ball.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON config file (optional for verify)")
    p.add_argument("--out", help="directory for output files; stdout if omitted")
    p.add_argument("--seed", type=int)
    p.add_argument("--degree", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--K-terms", dest="K_terms", type=int)
    p.add_argument("--J-terms", dest="J_terms", type=int)
    p.add_argument("--lambda", dest="lam", type=float, nargs=2, metavar=("RE", "IM"))
    p.add_argument("--version", action="version", version=f"wco {__version__}")
    return p


def _emit(artifacts: dict, out_dir: str | None):
    if out_dir is None:
        for name in sorted(artifacts):
            sys.stdout.write(artifacts[name])
        return
    os.makedirs(out_dir, exist_ok=True)
    for name, text in artifacts.items():
        with open(os.path.join(out_dir, name), "w", newline="\n") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.config is None:
            if args.command != "verify":
                raise ConfigError("--config is required")
            cfg = {}
        else:
            try:
                with open(args.config) as fh:
                    cfg = json.load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
            if not isinstance(cfg, dict):
                raise ConfigError("config must be a JSON object")
        cfg = apply_overrides(cfg, args)
        artifacts = run(args.command, cfg, config_hash(cfg))
    except ContractFailure as exc:
        _emit(exc.payload, args.out)
        sys.stderr.write(json.dumps({"category": "numerical", "error": "ContractFailure", "message": str(exc)}, sort_keys=True) + "\n")
        return 2
    except SCOPE as exc:
        sys.stderr.write(json.dumps(_error("scope", exc), sort_keys=True) + "\n")
        return 1
    except VALIDATION as exc:
        sys.stderr.write(json.dumps(_error("validation", exc), sort_keys=True) + "\n")
        return 1
    except NUMERICAL as exc:
        sys.stderr.write(json.dumps(_error("numerical", exc), sort_keys=True) + "\n")
        return 2
    _emit(artifacts, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())

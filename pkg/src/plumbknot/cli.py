"""Command-line front end.

Every subcommand writes one JSON document (JSON lines for ``build``) to
``--out`` or stdout.  Exit codes: 0 success, 2 validation failure, 3 capacity,
64 usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields

from .errors import CapacityError, CycleCheckError, DomainError, InvariantError, PlumbKnotError

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_CAPACITY = 3
EXIT_USAGE = 64

COMMANDS = ("build", "verify-d2", "homology", "ss", "filtration", "components",
            "derivative", "taylor", "classify", "chord")


@dataclass
class RunConfig:
    """Resolved settings of one run; ``field`` is fixed to the rationals."""

    command: str
    m: int = None
    space: str = "S"
    out: str = None
    invariant: str = None
    max_page: int = 3
    reindex: bool = False
    cell: str = None
    curve: str = None
    threads: int = 1
    max_cells: int = 5_000_000
    verify: bool = False
    field: str = "QQ"

    def check(self) -> None:
        if self.field != "QQ":
            raise UsageError(f"unsupported coefficient field {self.field!r}")
        if self.max_cells is not None and self.max_cells <= 0:
            raise UsageError("--max-cells must be positive")
        if self.threads is not None and self.threads <= 0:
            raise UsageError("--threads must be positive")
        needs_m = {"build", "verify-d2", "homology", "ss", "filtration", "components", "taylor"}
        if self.command in needs_m and self.m is None:
            raise UsageError(f"{self.command} needs --m")
        if self.command in ("derivative", "taylor") and not self.invariant:
            raise UsageError(f"{self.command} needs --invariant")
        if self.command in ("derivative", "chord") and not self.cell:
            raise UsageError(f"{self.command} needs --cell")
        if self.command == "classify" and not (self.cell or self.curve):
            raise UsageError("classify needs --cell or --curve")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="plumbknot", description="Cell complexes and Vassiliev theory of plumbers' knots.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    p.add_argument("--m", type=int)
    p.add_argument("--space", choices=("P", "S", "B"))
    p.add_argument("--invariant")
    p.add_argument("--out")
    p.add_argument("--max-page", type=int, dest="max_page")
    p.add_argument("--reindex", action="store_true", default=None)
    p.add_argument("--cell", help="cell name as JSON (or @path)")
    p.add_argument("--curve", help="plumbers' curve as JSON (or @path)")
    p.add_argument("--threads", type=int)
    p.add_argument("--max-cells", type=int, dest="max_cells")
    p.add_argument("--verify", action="store_true", default=None)
    return p


def parse_config(argv) -> RunConfig:
    ns = _parser().parse_args(argv)
    base = {}
    if ns.config:
        try:
            with open(ns.config) as fh:
                base = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        known = {f.name for f in fields(RunConfig)}
        unknown = set(base) - known
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
    base["command"] = ns.command
    for f in fields(RunConfig):
        v = getattr(ns, f.name, None)
        if v is not None and f.name != "command":
            base[f.name] = v
    cfg = RunConfig(**base)
    cfg.check()
    return cfg


def _load_json_arg(text: str):
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return json.load(fh)
    return json.loads(text)


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=True)


def _set_threads(n: int) -> None:
    from . import _accel
    if _accel.USE_NUMBA and n and n > 1:
        import warnings
        import numba
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


# -- subcommands ---------------------------------------------------------------------

def _complex(cfg: RunConfig):
    from .complex import build_blowup, build_complex
    if cfg.space == "B":
        return build_blowup(cfg.m, cfg.max_cells)
    return build_complex(cfg.m, cfg.space, cfg.max_cells)


def cmd_build(cfg, out):
    cx = _complex(cfg)
    cx.write_jsonl(out)
    return EXIT_OK


def cmd_verify_d2(cfg, out):
    cx = _complex(cfg)
    defects = cx.d2_defects()
    out.write(_dumps({"m": cfg.m, "space": cfg.space, "cells": len(cx),
                      "counts": {str(k): v for k, v in cx.counts_by_dim().items()},
                      "d2_defects": defects, "ok": defects == 0}) + "\n")
    return EXIT_OK if defects == 0 else EXIT_INVALID


def cmd_homology(cfg, out):
    from .homology import homology_ranks
    cx = _complex(cfg)
    ranks = homology_ranks(cx)
    out.write(_dumps({"m": cfg.m, "space": cfg.space, "field": cfg.field,
                      "ranks": [[d, r] for d, r in ranks]}) + "\n")
    return EXIT_OK


def cmd_ss(cfg, out):
    from .complex import build_blowup
    from .homology import homology_ranks, spectral_sequence, ss_json
    cx = build_blowup(cfg.m, cfg.max_cells)
    pages = spectral_sequence(cfg.m, cfg.max_page, cx)
    doc = json.loads(ss_json(cfg.m, pages, cfg.reindex))
    doc["homology"] = [[d, r] for d, r in homology_ranks(cx)]
    out.write(_dumps(doc) + "\n")
    return EXIT_OK


def cmd_filtration(cfg, out):
    from .complex import build_complex
    from .filtration import complexity_table
    out.write(complexity_table(cfg.m).to_json(build_complex(cfg.m, "S", cfg.max_cells)) + "\n")
    return EXIT_OK


def cmd_components(cfg, out):
    from .complex import build_complex
    from .filtration import knot_components
    comps = knot_components(cfg.m)
    P = build_complex(cfg.m, "P", cfg.max_cells)
    labels = sorted([P.index[int(c)], int(l)] for c, l in zip(comps.ids, comps.labels))
    out.write(_dumps({"m": cfg.m, "count": comps.count, "sizes": comps.sizes(),
                      "labels": labels}) + "\n")
    return EXIT_OK


def _blowup_cell(cfg):
    from .complex import blowup_name_from_dict
    cell = blowup_name_from_dict(_load_json_arg(cfg.cell))
    if cfg.m is not None and cell.m != cfg.m:
        raise DomainError(f"--m {cfg.m} does not match the cell (m={cell.m})")
    return cell


def cmd_derivative(cfg, out):
    from .complex import blowup_name_to_dict, fraction_str
    from .combinatorics import name_to_dict
    from .invariants import get_invariant
    from .vassiliev import total_coboundary, vassiliev_derivative
    cell = _blowup_cell(cfg)
    inv = get_invariant(cfg.invariant, cell.m)
    cob = sorted(([name_to_dict(c), int(v)] for c, v in total_coboundary(cell)),
                 key=lambda t: _dumps(t[0]))
    out.write(_dumps({"invariant": inv.id, "cell": blowup_name_to_dict(cell),
                      "coboundary": cob,
                      "derivative": fraction_str(vassiliev_derivative(inv, cell))}) + "\n")
    return EXIT_OK


def cmd_taylor(cfg, out):
    from .complex import build_blowup
    from .invariants import get_invariant
    from .vassiliev import taylor_series
    inv = get_invariant(cfg.invariant, cfg.m)
    tc = taylor_series(inv, cfg.m, verify=cfg.verify, raise_on_failure=False)
    cx = build_blowup(cfg.m, cfg.max_cells) if cfg.m <= 4 else None
    out.write(tc.to_json(cx) + "\n")
    if cfg.verify and not tc.verified_cycle:
        face = min(tc.defect)
        from .complex import decode_blowup
        print(f"plumbknot: Taylor chain is not a cycle ({len(tc.defect)} faces, "
              f"e.g. {decode_blowup(cfg.m, *face)})", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


def cmd_classify(cfg, out):
    from .combinatorics import canonicalize, name_from_dict, name_to_dict
    from .filtration import complexity_table, knot_components
    from .combinatorics import osp_table
    from .geometry import PlumbersCurve, cell_of, singularity_report
    from .vassiliev import is_stable
    if cfg.curve:
        name = cell_of(PlumbersCurve.from_dict(_load_json_arg(cfg.curve)))
    else:
        name = name_from_dict(_load_json_arg(cfg.cell))
    canon = canonicalize(name)
    rep = singularity_report(canon)
    doc = {"cell": name_to_dict(canon), "m": canon.m, "dim": canon.dim, "codim": canon.codim,
           "singular": bool(rep)}
    if rep:
        cx, flag = complexity_table(canon.m).lookup(canon)
        doc.update({"report": rep.to_dict(), "complexity": cx, "provenance": flag,
                    "stable": is_stable(canon)})
    elif canon.is_top:
        doc["component"] = knot_components(canon.m).label_of(osp_table(canon.m).id_of(canon))
    out.write(_dumps(doc) + "\n")
    return EXIT_OK


def cmd_chord(cfg, out):
    from .combinatorics import name_from_dict, name_to_dict
    from .vassiliev import chord_diagram_of
    data = _load_json_arg(cfg.cell)
    name = name_from_dict(data)
    out.write(_dumps({"cell": name_to_dict(name), **chord_diagram_of(name).to_dict()}) + "\n")
    return EXIT_OK


HANDLERS = {
    "build": cmd_build, "verify-d2": cmd_verify_d2, "homology": cmd_homology, "ss": cmd_ss,
    "filtration": cmd_filtration, "components": cmd_components, "derivative": cmd_derivative,
    "taylor": cmd_taylor, "classify": cmd_classify, "chord": cmd_chord,
}


def dispatch(argv) -> int:
    try:
        cfg = parse_config(argv)
        if cfg.space == "B" and cfg.command not in ("build", "verify-d2", "homology"):
            raise UsageError("--space B applies to build, verify-d2 and homology")
    except UsageError as exc:
        print(f"plumbknot: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _set_threads(cfg.threads)
    out = open(cfg.out, "w") if cfg.out else sys.stdout
    try:
        return HANDLERS[cfg.command](cfg, out)
    except CapacityError as exc:
        print(f"plumbknot: capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (DomainError, InvariantError, CycleCheckError, PlumbKnotError,
            KeyError, ValueError) as exc:
        print(f"plumbknot: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    finally:
        if out is not sys.stdout:
            out.close()


def main(argv=None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())


__all__ = ["RunConfig", "dispatch", "main", "parse_config"]

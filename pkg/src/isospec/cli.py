"""Command line front end: ``isospec {construct,verify,spectrum,compare} --config FILE``.

Exit codes: 0 success, 2 invalid input, 3 a checked identity or comparison
failed, 4 spectra with mismatched truncation were compared.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import exact
from ._version import __version__
from .deform import DeformSpec, Splitting, replace_anticommutator, sigma_a_partner, verify_reduction
from .endo_core import (
    EndoSpace,
    build_quaternionic_eswa,
    check_htype,
    heisenberg_ab,
    make_endo_space,
    product_space,
    quaternionic_heisenberg,
)
from .errors import IsospecError, TruncationMismatch
from .intertwine import check_boundary_preservation, check_j2_vanishes, verify_intertwine
from .spectral_lab import Domain, SpectrumReport, Truncation, compare_spectra, spectrum

EXIT_OK, EXIT_INVALID, EXIT_FAILED, EXIT_MISUSE = 0, 2, 3, 4


class ConfigError(IsospecError):
    """Malformed configuration; carries the offending config path."""


# --------------------------------------------------------------------------
# config parsing
# --------------------------------------------------------------------------

def _at(path: str, fn, *args):
    try:
        return fn(*args)
    except IsospecError as exc:
        raise type(exc)(f"{path}: {type(exc).__name__}: {exc}") from exc
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {type(exc).__name__}: {exc}") from exc


def _sym_matrix(m):
    return [[m]] if isinstance(m, (str, int)) or (isinstance(m, list) and m and not isinstance(m[0], list)) else m


def build_space(spec: dict, base: Path, path: str = "space") -> EndoSpace:
    """Space from an inline spec or ``{"file": ...}`` holding a serialized space."""
    if "file" in spec:
        text = (base / spec["file"]).read_text()
        return _at(path, EndoSpace.from_json, text)
    kind = spec.get("kind")
    if kind == "quaternionic":
        sym = [_sym_matrix(m) for m in spec.get("sym", [])]
        return _at(path, build_quaternionic_eswa, int(spec.get("k", 1)), spec.get("a", "i"), sym,
                   spec.get("side", "left"))
    if kind == "quaternionic_heisenberg":
        return _at(path, quaternionic_heisenberg, int(spec["k"]))
    if kind == "heisenberg_ab":
        return _at(path, heisenberg_ab, int(spec["a"]), int(spec["b"]))
    if kind == "raw":
        return _at(path, make_endo_space, int(spec["n"]), spec["generators"],
                   spec.get("anticommutator_index"), spec.get("provenance", "raw"))
    if kind == "product":
        factors = [build_space(f, base, f"{path}.factors[{i}]") for i, f in enumerate(spec["factors"])]
        return _at(path, product_space, factors, bool(spec.get("merge_z", False)))
    raise ConfigError(f"{path}: unknown space kind {kind!r}")


def build_partner(spec: dict, space: EndoSpace, base: Path, path: str = "partner") -> EndoSpace:
    kind = spec.get("kind")
    if kind == "sigma_a_partner":
        split = None
        if spec.get("blocks"):
            split = _at(path, Splitting.coordinate, spec["blocks"], space.n, spec["assignment"])
        return _at(path, sigma_a_partner, space, spec["assignment"], split)
    if kind == "replace_anticommutator":
        return _at(path, replace_anticommutator, space, exact.qmatrix(spec["A"]))
    if kind == "scale_anticommutator":
        gens = list(space.generators)
        gens[space.anticommutator_index] = gens[space.anticommutator_index] * exact.frac(spec["factor"])
        return _at(path, space.with_generators, gens, "keep", f"scaled-A({space.provenance})")
    return build_space(spec, base, path)


def load_config(path: str) -> tuple[dict, Path]:
    p = Path(path)
    try:
        return json.loads(p.read_text()), p.parent
    except FileNotFoundError as exc:
        raise ConfigError(f"config file {path} does not exist") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------

def _write_report(out: Path, name: str, body: dict) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    doc = {"version": __version__, "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(), **body}
    target = out / name
    target.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n")
    return target


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _yes(flag: bool) -> str:
    return "yes" if flag else "no"


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_construct(cfg: dict, base: Path, out: Path, args) -> int:
    space = build_space(cfg["space"], base)
    target = out / cfg.get("output", "space.json")
    out.mkdir(parents=True, exist_ok=True)
    target.write_text(space.to_json() + "\n")
    print(f"space: {target}")
    print(f"n: {space.n}  l: {space.l}")
    print(f"anticommutator: {_yes(space.anticommutator_index is not None)}")
    print(f"H-type: {_yes(bool(check_htype(space)))}")
    return EXIT_OK


def _w_set(raw, l: int):  # noqa: E741
    if raw is None:
        eye = [[1 if i == j else 0 for j in range(l)] for i in range(l)]
        return [[0] * l] + eye
    return [[exact.frac(w) for w in W] for W in raw]


def cmd_verify(cfg: dict, base: Path, out: Path, args) -> int:
    space = build_space(cfg["space"], base)
    toggles = cfg.get("verify", {})
    results: dict = {}
    passed: dict = {}
    if toggles.get("htype", False):
        rep = check_htype(space)
        results["htype"] = {"ok": bool(rep), "failing_pairs": [list(p) for p in rep.failing_pairs]}
        passed["htype"] = bool(rep)
    if toggles.get("reduction", False):
        spec = _at("deform", DeformSpec.from_dict, cfg["deform"], space)
        rep = _at("deform", verify_reduction, space, spec)
        results["reduction"] = rep.to_dict()
        passed["reduction"] = rep.ok
    partner = build_partner(cfg["partner"], space, base) if "partner" in cfg else None
    inter = toggles.get("intertwine")
    if inter:
        if partner is None:
            raise ConfigError("verify.intertwine: needs a 'partner' space")
        rep = verify_intertwine(space, partner, int(inter.get("max_degree", 2)), _w_set(inter.get("W_set"), space.l),
                                max_m=int(inter.get("max_m", 1)))
        results["intertwine"] = rep.to_dict()
        passed["intertwine"] = rep.ok
    if toggles.get("j2", False):
        ai = space.anticommutator_index
        if ai is None:
            raise ConfigError("verify.j2: space has no anticommutator")
        others = [a for a in range(space.l) if a != ai]
        pairs = {f"{c},{d}": check_j2_vanishes(space, c, d) for c in others for d in others}
        results["j2"] = {k: {"j2_vanishes": v.j2_vanishes, "j1_equals_jcd": v.j1_equals_jcd} for k, v in pairs.items()}
        passed["j2"] = all(v.ok for v in pairs.values())
    if toggles.get("boundary", False):
        if partner is None:
            raise ConfigError("verify.boundary: needs a 'partner' space")
        rep = check_boundary_preservation(space, partner, cfg.get("domain_kind", "ball_torus"),
                                          int(toggles.get("boundary_degree", 4)))
        results["boundary"] = rep.to_dict()
        passed["boundary"] = rep.ok
    target = _write_report(out, cfg.get("output", "verify_report.json"),
                           {"space": space.provenance, "partner": partner.provenance if partner else None,
                            "results": results, "passed": passed, "seed": args.seed})
    for name, ok in passed.items():
        print(f"{name}: {'PASS' if ok else 'FAIL'}")
    if "reduction" in results:
        print(f"reduction: {results['reduction']['conclusion']}")
    print(f"report: {target}")
    return EXIT_OK if all(passed.values()) else EXIT_FAILED


def _spectrum_params(cfg: dict, l: int):  # noqa: E741
    sp = cfg.get("spectrum", {})
    dom = Domain.from_dict(sp["domain"]) if "domain" in sp else Domain.torus(l)
    bcs = sp.get("bc", ["dirichlet"])
    bcs = [bcs] if isinstance(bcs, str) else list(bcs)
    trunc = Truncation.from_dict(sp.get("trunc", {"r_max": 2, "n_radial": 8, "W_max": 1}))
    partner_trunc = Truncation.from_dict(sp["partner_trunc"]) if "partner_trunc" in sp else trunc
    return dom, bcs, trunc, partner_trunc, int(sp.get("count", 15)), float(exact.frac(sp.get("tol", "1/100000000")))


def _save_spectrum(out: Path, stem: str, rep: SpectrumReport) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{stem}.csv").write_text(rep.to_csv())
    _write_report(out, f"{stem}.json", rep.to_dict())


def cmd_spectrum(cfg: dict, base: Path, out: Path, args) -> int:
    space = build_space(cfg["space"], base)
    partner = build_partner(cfg["partner"], space, base) if "partner" in cfg else None
    dom, bcs, trunc, ptrunc, count, tol = _spectrum_params(cfg, space.l)
    status = EXIT_OK
    summary = {}
    for bc in bcs:
        rep = spectrum(space, dom, bc, trunc, threads=args.threads)
        _save_spectrum(out, f"spectrum_space_{bc}", rep)
        print(f"{bc}: first eigenvalue {rep.eigenvalues[0]:.12g} ({len(rep.eigenvalues)} total)")
        if partner is None:
            continue
        rep2 = spectrum(partner, dom, bc, ptrunc, threads=args.threads)
        _save_spectrum(out, f"spectrum_partner_{bc}", rep2)
        try:
            cmp = compare_spectra(rep, rep2, count, tol)
        except TruncationMismatch as exc:
            print(f"{bc}: comparison refused: {exc}", file=sys.stderr)
            return EXIT_MISUSE
        summary[bc] = cmp.to_dict()
        print(f"{bc}: {'PASS' if cmp.ok else 'FAIL'} first {count} eigenvalues, "
              f"max relative difference {cmp.max_rel_diff:.3e}"
              + ("" if cmp.ok else f", first mismatch at index {cmp.first_mismatch}"))
        if not cmp.ok:
            status = EXIT_FAILED
    if summary:
        _write_report(out, "comparison.json", {"count": count, "tol": tol, "results": summary})
    return status


def _report_from_file(path: Path) -> SpectrumReport:
    d = json.loads(path.read_text())
    return SpectrumReport.from_dict(d)


def cmd_compare(cfg: dict, base: Path, out: Path, args) -> int:
    c = cfg["compare"]
    r1 = _report_from_file(base / c["left"])
    r2 = _report_from_file(base / c["right"])
    count, tol = int(c.get("count", 15)), float(exact.frac(c.get("tol", "1/100000000")))
    try:
        cmp = compare_spectra(r1, r2, count, tol)
    except TruncationMismatch as exc:
        print(f"comparison refused: {exc}", file=sys.stderr)
        return EXIT_MISUSE
    _write_report(out, cfg.get("output", "comparison.json"), cmp.to_dict())
    print(f"{'PASS' if cmp.ok else 'FAIL'} max relative difference {cmp.max_rel_diff:.3e}")
    return EXIT_OK if cmp.ok else EXIT_FAILED


COMMANDS = {"construct": cmd_construct, "verify": cmd_verify, "spectrum": cmd_spectrum, "compare": cmd_compare}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="isospec", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"isospec {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default="isospec-out", help="output directory")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads for spectrum blocks (default: $ISOSPEC_THREADS or 1)")
        p.add_argument("--seed", type=int, default=0, help="recorded in reports")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads is None and os.environ.get("ISOSPEC_THREADS"):
        args.threads = int(os.environ["ISOSPEC_THREADS"])
    try:
        cfg, base = load_config(args.config)
        return COMMANDS[args.command](cfg, base, Path(args.out), args)
    except IsospecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except KeyError as exc:
        print(f"error: missing config key {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())

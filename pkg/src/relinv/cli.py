"""Command-line runner: ``run``, ``tabulate-dimensions`` and ``inspect-wigner``.

Exit codes: 0 all declared thresholds met, 1 a threshold was missed,
2 invalid configuration or kinematics, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import warnings
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from . import __version__
from .config import ConfigError, Located, complex_matrix, complex_scalar, load_config, lorentz_element, momentum, spin_label
from .encode import (Species, DyonConfiguration, TotalMomentumLabel, build_dyon_cell, encode_dyon_qubit,
                     encode_dyon_state, encode_massive_equal_momentum, encode_massless_helicity_sum,
                     encode_total_momentum, product_state)
from .errors import DimensionMismatchError, KinematicsError, NumericalFailure, SuperselectionError
from .little_group import (FourMomentum, LorentzTransform, compose_elements, element_distance,
                           wigner_phase_massless, wigner_rotation_massive, pairwise_phase)
from .schur import build_schur_basis_su2, build_schur_basis_u1, dimension_table, label_str
from .serialize import SCHEMA, dumps
from .slocc import SLOCCMeasure, slocc_proportionality
from .twirl import GroupMeasure, LorentzSampler, invariance_report, rep_for_state

EXIT_OK, EXIT_THRESHOLD, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
CSV_COLUMNS = ["scheme", "N", "sector", "irrep", "D_L", "D_V", "protected", "average_deviation",
               "worst_deviation", "beta", "z_rms"]
BUILD_ERRORS = (ValueError, KinematicsError, DimensionMismatchError, SuperselectionError)


def _require(loc: Located, path: tuple):
    node = loc.cfg
    for key in path:
        if not isinstance(node, dict) or key not in node:
            raise loc.error(path[:-1], f"missing required key '{path[-1]}' for scheme {loc.cfg['scheme']}")
        node = node[key]
    return node


def _blocks(loc: Located) -> dict:
    raw = _require(loc, ("blocks",))
    out = {}
    for key, m in raw.items():
        try:
            out[key] = complex_matrix(m)
        except ValueError as exc:
            raise loc.error(("blocks", key), str(exc)) from None
    return out


def _guard(loc: Located, path: tuple, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except BUILD_ERRORS as exc:
        raise loc.error(path, str(exc)) from None


def build_state(loc: Located):
    cfg = loc.cfg
    scheme = cfg["scheme"]
    kin = cfg.get("kinematics", {})
    if scheme == "massive":
        n = _require(loc, ("N",))
        if spin_label(cfg.get("spin", "1/2")) != Fraction(1, 2):
            raise loc.error(("spin",), "the massive encoding is built for spin-1/2 constituents")
        mass = kin.get("mass", 1.0)
        if mass <= 0:
            raise loc.error(("kinematics", "mass"), "massive scheme needs mass > 0")
        p = _guard(loc, ("kinematics",), FourMomentum.massive, mass, kin.get("momentum", [0.0, 0.0, 0.0]))
        basis = _guard(loc, ("N",), build_schur_basis_su2, n)
        if "product_state" in cfg:
            return _product(loc, basis, p, n)
        return _guard(loc, ("blocks",), encode_massive_equal_momentum, basis, p, _blocks(loc))
    if scheme == "massless":
        n = _require(loc, ("N",))
        p = _guard(loc, ("kinematics", "momentum"), FourMomentum.massless, _require(loc, ("kinematics", "momentum")))
        basis = _guard(loc, ("N",), build_schur_basis_u1, n)
        return _guard(loc, ("blocks",), encode_massless_helicity_sum, basis, p, _blocks(loc))
    if scheme == "total-momentum":
        lab = _guard(
            loc, ("kinematics",), TotalMomentumLabel.build,
            _require(loc, ("kinematics", "mandelstam")), spin_label(_require(loc, ("kinematics", "J"))),
            kin.get("momentum", [0.0, 0.0, 0.0]),
            [[spin_label(x) for x in lab] for lab in _require(loc, ("kinematics", "labels"))],
        )
        blocks = _blocks(loc)
        if len(blocks) != 1 or spin_label(next(iter(blocks))) != lab.j:
            raise loc.error(("blocks",), f"total-momentum blocks must have the single key '{label_str(lab.j)}'")
        return _guard(loc, ("blocks",), encode_total_momentum, lab, next(iter(blocks.values())))
    if scheme == "dyon":
        return _dyon_state(loc)
    raise loc.error(("scheme",), f"scheme {scheme} has no Lorentz encoding")


def _product(loc, basis, p, n):
    bits = loc.cfg["product_state"]
    if len(bits) != n:
        raise loc.error(("product_state",), f"product_state needs {n} entries")
    ket = np.zeros(2 ** n)
    ket[int("".join(map(str, bits)), 2)] = 1.0
    return product_state("massive", basis, np.outer(ket, ket), {"p": p, "N": n, "spin": Fraction(1, 2)})


def _dyon_state(loc: Located):
    cfg = loc.cfg
    species = {}
    for k, sp in enumerate(_require(loc, ("kinematics", "species"))):
        key = tuple(sp["charge"])
        p = _guard(loc, ("kinematics", "species", k), FourMomentum.massive, sp["mass"], sp["momentum"])
        species[key] = Species(key, p, spin_label(sp.get("spin", "1/2")))
    cells = []
    for k, br in enumerate(_require(loc, ("branches",))):
        if "bit" in br:
            cells.append(_guard(loc, ("branches", k), build_dyon_cell, br["bit"], species))
        else:
            cells.append(_guard(loc, ("branches", k), DyonConfiguration, tuple(map(tuple, br["charges"])), species))
    amps = [complex_scalar(x) for x in cfg.get("amplitudes", [2 ** -0.5, 2 ** -0.5])]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        qubit = _guard(loc, ("branches",), encode_dyon_qubit, cells[0], cells[1], *amps)
    return _guard(loc, ("kinematics",), encode_dyon_state, qubit)


def build_measure(loc: Located, seed: int, samples: int | None):
    m = loc.cfg.get("measure", {})
    kind = m.get("kind", "parametric")
    if kind == "parametric":
        sampler = _guard(
            loc, ("measure",), LorentzSampler,
            samples=samples or m.get("samples", 500), seed=seed, rapidity=m.get("rapidity", "half-gaussian"),
            sigma=m.get("sigma", 1.0), df=m.get("df", 2.0), max_rapidity=m.get("max_rapidity", 8.0),
            boost_axis=None if m.get("boost_axis") is None else tuple(m["boost_axis"]),
            rotation=m.get("rotation", "uniform"),
        )
        return GroupMeasure.parametric(sampler)
    if kind == "delta":
        el = _guard(loc, ("measure", "element"), lorentz_element, _require(loc, ("measure", "element")))
        return GroupMeasure.delta(el)
    if kind == "discrete":
        els = [_guard(loc, ("measure", "elements", k), lorentz_element, e)
               for k, e in enumerate(_require(loc, ("measure", "elements")))]
        return _guard(loc, ("measure", "weights"), GroupMeasure.discrete, els, m.get("weights"))
    raise loc.error(("measure", "kind"), f"measure kind '{kind}' is only valid for the slocc scheme")


def _csv_sort_key(row):
    return (row["scheme"], int(row["N"]), float(Fraction(row["irrep"])), row.get("sector", ""))


def _fmt(x):
    return "" if x is None else repr(float(x)) if isinstance(x, float) else str(x)


def write_csv(rows: list[dict], path_or_file) -> None:
    rows = sorted(rows, key=_csv_sort_key)
    own = isinstance(path_or_file, (str, os.PathLike))
    f = open(path_or_file, "w", newline="", encoding="utf-8") if own else path_or_file
    try:
        w = csv.DictWriter(f, fieldnames=list(rows[0].keys()) if rows else CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(v) for k, v in r.items()})
    finally:
        if own:
            f.close()


def _run_lorentz(loc, seed, samples):
    cfg = loc.cfg
    state = build_state(loc)
    measure = build_measure(loc, seed, samples)
    rep = rep_for_state(state, model=cfg.get("model", "species")) if state.scheme == "dyon" else rep_for_state(state)
    threshold = cfg.get("threshold", 1e-9)
    report = invariance_report(state, measure, rep=rep, threshold=threshold)
    expect = cfg.get("expect", "invariant")
    ok = report.passed if expect == "invariant" else report.worst_case > threshold
    n = state.kinematics.get("N", 1)
    rows = [
        {"scheme": state.scheme, "N": n, "sector": b.sector, "irrep": b.label, "D_L": b.dim_irrep,
         "D_V": b.multiplicity, "protected": b.protected, "average_deviation": b.average,
         "worst_deviation": b.worst, "beta": None, "z_rms": None}
        for b in report.blocks
    ]
    body = {"report": report.to_dict(), "expect": expect, "model": cfg.get("model", "species") if state.scheme == "dyon" else None}
    if state.scheme == "dyon":
        body["dyon"] = state.info["qubit"]
    return ok, body, rows


def _run_slocc(loc, seed, samples):
    cfg = loc.cfg
    n = _require(loc, ("N",))
    basis = _guard(loc, ("N",), build_schur_basis_su2, n)
    state = _guard(loc, ("blocks",), encode_massive_equal_momentum, basis, FourMomentum.massive(1.0, [0, 0, 0]),
                   _blocks(loc))
    m = cfg.get("measure", {})
    if m.get("kind", "slocc") != "slocc":
        raise loc.error(("measure", "kind"), "slocc scheme needs measure kind 'slocc'")
    meas = _guard(loc, ("measure",), SLOCCMeasure, samples=samples or m.get("samples", 5000), seed=seed,
                  log_a_sigma=m.get("log_a_sigma", 0.5), compact=m.get("compact", "haar"))
    rep = slocc_proportionality(state.matrix, basis, meas, groups=m.get("groups", 100), z_limit=m.get("z_limit", 3.0))
    rows = []
    for b in rep.blocks:
        ir = basis.irrep(Fraction(b.label))
        rows.append({"scheme": "slocc", "N": n, "sector": "spin", "irrep": b.label, "D_L": ir.dim_irrep,
                     "D_V": ir.multiplicity, "protected": b.beta is not None, "average_deviation": b.relative_residual,
                     "worst_deviation": None, "beta": b.beta, "z_rms": b.z_rms})
    return rep.passed, {"report": rep.to_dict(), "expect": "proportional"}, rows


def cmd_run(args) -> int:
    try:
        cfg, lines = load_config(args.config)
    except ConfigError as exc:
        print(f"{args.config}:{exc}", file=sys.stderr)
        return EXIT_CONFIG
    loc = Located(cfg, lines)
    seed = args.seed if args.seed is not None else cfg.get("seed", 0)
    try:
        if cfg["scheme"] == "slocc":
            ok, body, rows = _run_slocc(loc, seed, args.samples)
        else:
            ok, body, rows = _run_lorentz(loc, seed, args.samples)
    except ConfigError as exc:
        print(f"{args.config}:{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    code = EXIT_OK if ok else EXIT_THRESHOLD
    out = {
        "schema": SCHEMA,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "tool": f"relinv {__version__}",
        "config": os.path.basename(args.config),
        "scheme": cfg["scheme"],
        "seed": seed,
        "status": "pass" if ok else "fail",
        "exit_code": code,
        **body,
    }
    os.makedirs(args.out_dir, exist_ok=True)
    outputs = cfg.get("output", {})
    report_path = os.path.join(args.out_dir, outputs.get("report", "report.json"))
    csv_path = os.path.join(args.out_dir, outputs.get("csv", "summary.csv"))
    with open(report_path, "w", encoding="utf-8") as f:
        f.write(dumps(out) + "\n")
    write_csv(rows, csv_path)
    print(f"{out['status']}: {cfg['scheme']} report written to {report_path}")
    return code


def _parse_ns(text: str) -> list[int]:
    ns = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part:
            a, b = part.split("-")
            ns.extend(range(int(a), int(b) + 1))
        elif part:
            ns.append(int(part))
    return ns


def cmd_tabulate(args) -> int:
    try:
        rows = dimension_table(args.scheme, _parse_ns(args.n))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rows = [{**r, "irrep": label_str(r["irrep"])} for r in rows]
    if args.out:
        write_csv(rows, args.out)
    else:
        buf = io.StringIO()
        write_csv(rows, buf)
        sys.stdout.write(buf.getvalue())
    return EXIT_OK


def _wigner(lt, p, partner=None):
    if partner is not None:
        return pairwise_phase(lt, p, partner)
    return wigner_rotation_massive(lt, p) if p.is_massive else wigner_phase_massless(lt, p)


def inspect_wigner(lt: LorentzTransform, p: FourMomentum, partner: FourMomentum | None = None, seed: int = 0,
                   tol: float = 1e-8) -> dict:
    """Wigner element of ``lt`` at ``p`` plus a cocycle check on a random split ``lt = l2 l1``."""
    w = _wigner(lt, p, partner)
    l1 = LorentzSampler(samples=1, seed=seed).elements()[0]
    l2 = lt @ l1.inverse()
    w1 = _wigner(l1, p, partner)
    w2 = _wigner(l2, l1.apply(p), None if partner is None else l1.apply(partner))
    resid = element_distance(compose_elements(w2, w1), w)
    out = {
        "lorentz": [[float(x) for x in row] for row in lt.matrix],
        "momentum": p.to_list(),
        "transformed_momentum": lt.apply(p).to_list(),
        "wigner": {k: v for k, v in w.to_dict().items() if k != "raw"},
        "cocycle": {"split_seed": seed, "residual": resid, "passed": resid <= tol},
    }
    if partner is not None:
        out["partner_momentum"] = partner.to_list()
    return out


def cmd_inspect(args) -> int:
    try:
        desc = json.loads(args.lorentz)
        lt = lorentz_element(desc) if isinstance(desc, dict) else LorentzTransform(np.array(desc, dtype=float))
        p = momentum(args.mass, args.momentum)
        partner = None
        if args.partner_momentum is not None:
            partner = momentum(args.partner_mass, args.partner_momentum)
        out = inspect_wigner(lt, p, partner, seed=args.seed)
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        print(f"error: invalid Lorentz element ({exc})", file=sys.stderr)
        return EXIT_CONFIG
    except BUILD_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(json.dumps(out, indent=2, sort_keys=True))
    return EXIT_OK if out["cocycle"]["passed"] else EXIT_THRESHOLD


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="relinv", description="Lorentz-invariant encodings and twirl checks.")
    ap.add_argument("--version", action="version", version=f"relinv {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="build an encoding from a config and check its invariance")
    run.add_argument("--config", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--out-dir", default=".")
    run.add_argument("--samples", type=int)
    run.set_defaults(func=cmd_run)

    tab = sub.add_parser("tabulate-dimensions", help="CSV of irrep and multiplicity dimensions")
    tab.add_argument("--scheme", choices=["massive", "massless"], required=True)
    tab.add_argument("--n", default="1-6", help="N values, e.g. '1-6' or '2,4,8'")
    tab.add_argument("--out")
    tab.set_defaults(func=cmd_tabulate)

    ins = sub.add_parser("inspect-wigner", help="Wigner element of a Lorentz transform at a momentum")
    ins.add_argument("--lorentz", default='{"ops": []}',
                     help='JSON: {"ops": [{"boost": {...}}, {"rotation": {...}}]}, {"matrix": ...} or a 4x4 list')
    ins.add_argument("--mass", type=float, default=1.0, help="0 for a massless momentum")
    ins.add_argument("--momentum", type=float, nargs=3, default=[0.0, 0.0, 0.0])
    ins.add_argument("--partner-mass", type=float, default=1.0)
    ins.add_argument("--partner-momentum", type=float, nargs=3, help="gives the pairwise phase instead")
    ins.add_argument("--seed", type=int, default=0)
    ins.set_defaults(func=cmd_inspect)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Verbs: gen, residual, index, canonical, wannier, sweep, selftest.

Exit codes: 0 success, 2 validation error (bad input, bad flags), 3
mathematical obstruction (GapTooSmall, NontrivialClass) with the
obstruction named on stderr, so sweeps across phase boundaries can tell
"obstructed" apart from "broken".
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import matio
from .canonical import (
    commuting_pair_from_sphere,
    diag_anti_selfdual,
    k2_quaternion_witness,
    k2_real_witness,
    k2_twisted_witness,
    polar_product_check,
)
from .errors import ObstructionError, ValidationError
from .invariants import (
    bott_index,
    bott_index_unitaries,
    compressed_index,
    pf_bott_index,
    pf_bott_unitaries,
)
from .matkernel import (
    herm_eig,
    operator_norm,
    pfaffian_combinatorial,
    pfaffian_real_skew,
    polar,
)
from .models import (
    LatticeSpec,
    gap_levels,
    harper_projection,
    parse_flux,
    selfdual_double,
    torus_positions,
    voiculescu,
)
from .relations import disk_residual, sphere_residual, torus2_residual, torus4_residual
from .symmetry import SymmetryClass
from .wannier import compress_positions, eigenbasis_commuting, spread

TRIPLE = ("H1", "H2", "H3")
PAIR = ("U1", "U2")
QUAD = ("X1", "X2", "X3", "X4")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acbott",
        description="Bott/Pfaffian-Bott indices and diagnostics for almost commuting matrices",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    gen = sub.add_parser("gen", help="generate example systems")
    gsub = gen.add_subparsers(dest="what", required=True)
    g_v = gsub.add_parser("voiculescu", help="shift/clock unitary pair")
    g_v.add_argument("--n", type=int, required=True)
    g_v.add_argument("--doubled", action="store_true", help="pair with the transpose (self-dual)")
    g_v.add_argument("--out", required=True)
    g_t = gsub.add_parser("torus", help="exact diagonal torus positions")
    g_t.add_argument("--L", type=int, required=True)
    g_t.add_argument("--orbitals", type=int, default=1, choices=(1, 2))
    g_t.add_argument("--out", required=True)
    g_h = gsub.add_parser("harper", help="magnetic lattice model and Fermi projection")
    g_h.add_argument("--config", default=None,
                     help="flat key=value lattice spec file (overrides the flags)")
    g_h.add_argument("--L", type=int, default=None)
    g_h.add_argument("--flux", type=str, default="0")
    g_h.add_argument("--fermi", type=str, default=None,
                     help="Fermi level, or 'fill:K' for mid-gap after K bands of L*L/q states")
    g_h.add_argument("--orbitals", type=int, default=1, choices=(1, 2))
    g_h.add_argument("--out", required=True)

    res = sub.add_parser("residual", help="soft relation residuals")
    res.add_argument("relation", choices=("sphere", "torus2", "torus4", "disk"))
    res.add_argument("--in", dest="indir", required=True)
    res.add_argument("--format", choices=("json", "csv"), default="json")

    idx = sub.add_parser("index", help="topological indices")
    idx.add_argument("kind", choices=("bott", "pfbott", "compressed"))
    idx.add_argument("--in", dest="indir", required=True)
    idx.add_argument("--gap-tol", type=float, default=1e-6)
    idx.add_argument("--comm-tol", type=float, default=0.125)
    idx.add_argument("--class", dest="symclass", default="complex",
                     choices=("complex", "symmetric", "selfdual"))
    idx.add_argument("--seed", type=int, default=0)
    idx.add_argument("--format", choices=("json", "csv"), default="json")

    can = sub.add_parser("canonical", help="structured canonical forms and witnesses")
    csub = can.add_subparsers(dest="what", required=True)
    c_a = csub.add_parser("antidual", help="symplectic diagonalization of X")
    c_a.add_argument("--in", dest="indir", required=True)
    c_a.add_argument("--out", required=True)
    c_w = csub.add_parser("witness", help="two-torsion witness for S")
    c_w.add_argument("--kind", choices=("quaternion", "real", "twisted"), required=True)
    c_w.add_argument("--in", dest="indir", required=True)
    c_w.add_argument("--out", required=True)
    c_e = csub.add_parser("extract", help="commuting pair from a near-sphere triple")
    c_e.add_argument("--in", dest="indir", required=True)
    c_e.add_argument("--class", dest="symclass", default="symmetric",
                     choices=("symmetric", "selfdual"))
    c_e.add_argument("--seed", type=int, default=0)
    c_e.add_argument("--out", required=True)
    c_p = csub.add_parser("polarcheck", help="polar product identity diagnostic")
    c_p.add_argument("--in", dest="indir", required=True)

    wan = sub.add_parser("wannier", help="spread reports and compression")
    wsub = wan.add_subparsers(dest="what", required=True)
    w_s = wsub.add_parser("spread", help="spread of an eigenbasis against X1..X4")
    w_s.add_argument("--in", dest="indir", required=True)
    w_s.add_argument("--seed", type=int, default=0)
    w_s.add_argument("--out", default=None, help="CSV path (default stdout)")
    w_c = wsub.add_parser("compress", help="compress positions by a projection")
    w_c.add_argument("--in", dest="indir", required=True)
    w_c.add_argument("--seed", type=int, default=0)
    w_c.add_argument("--out", required=True)

    swp = sub.add_parser("sweep", help="parameter sweeps to CSV")
    swp.add_argument("--config", required=True)
    swp.add_argument("--out", required=True)
    swp.add_argument("--seed", type=int, default=0)
    swp.add_argument("--workers", type=int, default=2)

    st = sub.add_parser("selftest", help="run the built-in oracle suite")
    st.add_argument("--seed", type=int, default=0)
    return parser


def _flux_denominator(flux: float) -> int:
    from fractions import Fraction

    if flux == 0.0:
        return 2
    return Fraction(flux).limit_denominator(64).denominator


def _load(indir, roles):
    return matio.read_matrix_dir(indir, roles)


def _emit_report(report: dict, fmt: str) -> None:
    if fmt == "csv":
        writer = csv.writer(sys.stdout)
        writer.writerow(report.keys())
        writer.writerow(report.values())
    else:
        print(matio.dump_report(report))


def cmd_gen(args) -> int:
    out = Path(args.out)
    if args.what == "voiculescu":
        A, B = voiculescu(args.n)
        if args.doubled:
            A, B = selfdual_double(A, B)
        matio.write_matrix_dir(out, {"U1": A, "U2": B})
        print(f"wrote U1, U2 ({A.shape[0]}x{A.shape[0]}) to {out}")
        return 0
    if args.what == "torus":
        spec = LatticeSpec(L=args.L, orbitals=args.orbitals)
        Xs = torus_positions(spec)
        matio.write_matrix_dir(out, dict(zip(QUAD, Xs)))
        print(f"wrote X1..X4 ({Xs[0].shape[0]} sites) to {out}")
        return 0
    if args.config is not None:
        spec = LatticeSpec.from_file(args.config)
    else:
        if args.L is None:
            raise ValidationError("--L is required without --config")
        flux = parse_flux(args.flux)
        fermi_arg = args.fermi
        if fermi_arg is None:
            raise ValidationError("--fermi is required (value or fill:K)")
        if str(fermi_arg).startswith("fill:"):
            bands = int(str(fermi_arg).split(":", 1)[1])
            den = _flux_denominator(flux)
            fermi = gap_levels(args.L, flux, [bands / den])[0]
        else:
            fermi = float(fermi_arg)
        spec = LatticeSpec(
            L=args.L, flux=flux, fermi_level=fermi, orbitals=args.orbitals
        )
    P, H = harper_projection(spec)
    Xs = torus_positions(spec)
    matio.write_matrix_dir(out, {"P": P, "H": H, **dict(zip(QUAD, Xs))})
    print(f"wrote P, H, X1..X4 (fermi={spec.fermi_level:.6g}) to {out}")
    return 0


def cmd_residual(args) -> int:
    fns = {
        "sphere": (TRIPLE, sphere_residual),
        "torus2": (PAIR, torus2_residual),
        "torus4": (QUAD, torus4_residual),
        "disk": (("X1", "X2"), disk_residual),
    }
    roles, fn = fns[args.relation]
    report = fn(*_load(args.indir, roles))
    _emit_report(report.to_dict(), args.format)
    return 0


def cmd_index(args) -> int:
    roles = matio.available_roles(args.indir)
    if args.kind == "compressed":
        P, = _load(args.indir, ("P",))
        Xs = _load(args.indir, QUAD)
        report = compressed_index(
            P,
            Xs,
            SymmetryClass.parse(args.symclass),
            gap_tol=args.gap_tol,
            comm_tol=args.comm_tol,
            seed=args.seed,
        )
    elif set(PAIR) <= roles:
        U1, U2 = _load(args.indir, PAIR)
        fn = pf_bott_unitaries if args.kind == "pfbott" else bott_index_unitaries
        report = fn(U1, U2, gap_tol=args.gap_tol)
    else:
        H1, H2, H3 = _load(args.indir, TRIPLE)
        fn = pf_bott_index if args.kind == "pfbott" else bott_index
        report = fn(H1, H2, H3, gap_tol=args.gap_tol)
    _emit_report(report.to_dict(), args.format)
    return 0


def cmd_canonical(args) -> int:
    if args.what == "antidual":
        X, = _load(args.indir, ("X",))
        W, D = diag_anti_selfdual(X)
        out = Path(args.out)
        matio.write_matrix_dir(out, {"W": W, "D": np.diag(D)})
        print(matio.dump_report({"half_spectrum": D.tolist()}))
        return 0
    if args.what == "witness":
        S, = _load(args.indir, ("S",))
        fn = {
            "quaternion": k2_quaternion_witness,
            "real": k2_real_witness,
            "twisted": k2_twisted_witness,
        }[args.kind]
        report = fn(S)
        out = Path(args.out)
        matio.write_matrix_dir(out, {"W": report.witness})
        print(matio.dump_report({
            "bound": report.bound,
            "certified": report.certified,
            "norm_condition": report.norm_condition,
            "witness": str(out / "W.json"),
        }))
        return 0
    if args.what == "polarcheck":
        a, b = _load(args.indir, ("A", "B"))
        print(matio.dump_report({"polar_product_residual": polar_product_check(a, b)}))
        return 0
    H1, H2, H3 = _load(args.indir, TRIPLE)
    result = commuting_pair_from_sphere(
        H1, H2, H3, SymmetryClass.parse(args.symclass), seed=args.seed
    )
    out = Path(args.out)
    matio.write_matrix_dir(out, {"U": result.U, "K": result.K})
    print(matio.dump_report(result.residuals))
    return 0


def cmd_wannier(args) -> int:
    if args.what == "spread":
        Xs = _load(args.indir, QUAD)
        roles = matio.available_roles(args.indir)
        if "B" in roles:
            basis, = _load(args.indir, ("B",))
        else:
            basis = eigenbasis_commuting(Xs, tol=1e-8, seed=args.seed)
        report = spread(Xs, basis)
        rows = [("basis_index", "sigma2", "running_total", "running_max")]
        rows += list(report.csv_rows())
        if args.out:
            with open(args.out, "w", newline="") as fh:
                csv.writer(fh).writerows(rows)
            print(f"wrote {len(rows) - 1} rows to {args.out}; "
                  f"total={report.total:.6g} max={report.maximum:.6g}")
        else:
            csv.writer(sys.stdout).writerows(rows)
        return 0
    P, = _load(args.indir, ("P",))
    Xs = _load(args.indir, QUAD)
    rng = np.random.default_rng(args.seed)
    W, compressed, report = compress_positions(P, Xs, rng=rng)
    out = Path(args.out)
    matio.write_matrix_dir(out, {"W": W, **{f"X{i + 1}": X for i, X in enumerate(compressed)}})
    print(matio.dump_report({
        "delta": report.delta,
        "spread_budget": report.budget,
        "compressed_residual": report.residual,
    }))
    return 0


# -- sweep -----------------------------------------------------------------

def _parse_sweep_config(path) -> dict:
    values: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"bad sweep config line: {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        values[key] = val
    if "kind" not in values:
        raise ValidationError("sweep config needs kind=voiculescu|harper|noise")
    return values


def _split(text: str) -> list[str]:
    text = text.strip()
    if not text:
        return []
    return [part.strip() for part in text.split(",")]


def _grid_points(cfg: dict) -> tuple[list[dict], list[str]]:
    kind = cfg["kind"]
    if kind == "voiculescu":
        ns = [int(v) for v in _split(cfg.get("n", "4,8,16,32"))]
        doubled = cfg.get("doubled", "0") not in ("0", "false", "no")
        pts = [{"kind": kind, "n": n, "doubled": doubled} for n in ns]
        return pts, ["n", "doubled"]
    if kind == "harper":
        Ls = [int(v) for v in _split(cfg.get("L", "12"))]
        fluxes = _split(cfg.get("flux", "1/3"))
        fills = [int(v) for v in _split(cfg.get("fill", "1"))]
        orbitals = [int(v) for v in _split(cfg.get("orbitals", "1"))]
        comm_tol = float(cfg.get("comm_tol", "0.125"))
        pts = [
            {"kind": kind, "L": L, "flux": fx, "fill": f,
             "orbitals": o, "comm_tol": comm_tol}
            for L in Ls for fx in fluxes for f in fills for o in orbitals
        ]
        return pts, ["L", "flux", "fill", "orbitals"]
    if kind == "noise":
        etas = [float(v) for v in _split(cfg.get("eta", "1e-1,1e-2,1e-3"))]
        size = int(cfg.get("size", "12"))
        trials = int(cfg.get("trials", "1"))
        pts = [
            {"kind": kind, "eta": eta, "size": size, "trial": t}
            for eta in etas for t in range(trials)
        ]
        return pts, ["eta", "size", "trial"]
    raise ValidationError(f"unknown sweep kind {kind!r}")


def _run_sweep_point(point: dict, seed: int) -> dict:
    t0 = time.perf_counter()
    row = {k: v for k, v in point.items() if k not in ("kind", "comm_tol")}
    row.update({"delta": "", "value": "", "gap": "", "seconds": "", "error": ""})
    try:
        if point["kind"] == "voiculescu":
            A, B = voiculescu(point["n"])
            if point["doubled"]:
                A, B = selfdual_double(A, B)
                rep = pf_bott_unitaries(A, B)
            else:
                rep = bott_index_unitaries(A, B)
            row.update(delta=rep.input_residual, value=rep.value, gap=rep.gap)
        elif point["kind"] == "harper":
            flux = parse_flux(point["flux"])
            den = _flux_denominator(flux)
            fermi = gap_levels(point["L"], flux, [point["fill"] / den])[0]
            spec = LatticeSpec(L=point["L"], flux=flux, fermi_level=fermi,
                               orbitals=point["orbitals"])
            P, _ = harper_projection(spec)
            Xs = torus_positions(spec)
            cls = SymmetryClass.SELF_DUAL if point["orbitals"] == 2 else SymmetryClass.COMPLEX
            rep = compressed_index(P, Xs, cls, comm_tol=point["comm_tol"], seed=seed)
            row.update(delta=rep.details["delta_commutator"], value=rep.value, gap=rep.gap)
        else:
            rng = np.random.default_rng(seed + 7919 * point["trial"])
            n = point["size"]
            pts = rng.standard_normal((3, n))
            pts /= np.linalg.norm(pts, axis=0)
            Q = np.linalg.qr(rng.standard_normal((n, n)))[0]
            Hs = [(Q * pts[r]) @ Q.T for r in range(3)]
            eta = point["eta"]
            noisy = []
            for H in Hs:
                G = rng.standard_normal((n, n))
                G = (G + G.T) / 2
                noisy.append(H + eta * G / operator_norm(G))
            result = commuting_pair_from_sphere(
                *noisy, SymmetryClass.SYMMETRIC, seed=seed
            )
            row.update(
                delta=result.residuals["input"],
                value=f"{result.residuals['commutator']:.3e}",
                gap=result.residuals["reconstruction"],
            )
    except Exception as exc:  # noqa: BLE001 - partial failures become rows
        row["error"] = f"{type(exc).__name__}: {exc}"
    row["seconds"] = f"{time.perf_counter() - t0:.3f}"
    return row


def cmd_sweep(args) -> int:
    cfg = _parse_sweep_config(args.config)
    points, param_cols = _grid_points(cfg)
    header = param_cols + ["delta", "value", "gap", "seconds", "error"]
    rows: list[dict | None] = [None] * len(points)
    if points:
        with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
            futures = {
                pool.submit(_run_sweep_point, pt, args.seed): i
                for i, pt in enumerate(points)
            }
            for fut, i in futures.items():
                rows[i] = fut.result()
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([row.get(col, "") for col in header])
    print(f"wrote {len(points)} rows to {args.out}")
    return 0


# -- selftest ----------------------------------------------------------------

def _newton_polar(X, iterations=60):
    U = np.asarray(X, dtype=complex)
    for _ in range(iterations):
        U = (U + np.linalg.inv(U.conj().T)) / 2
    return U


def cmd_selftest(args) -> int:
    rng = np.random.default_rng(args.seed)
    failures = 0

    def check(name, ok, detail=""):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'} {name}{': ' + detail if detail else ''}")
        failures += 0 if ok else 1

    worst = 0.0
    for size in (2, 4, 6, 8, 10):
        for _ in range(10):
            M = rng.standard_normal((size, size))
            R = M - M.T
            alg = pfaffian_real_skew(R)
            ref = pfaffian_combinatorial(R).real
            worst = max(worst, abs(alg - ref) / max(1.0, abs(ref)))
    check("pfaffian vs combinatorial oracle", worst <= 1e-10, f"worst rel {worst:.2e}")

    worst = 0.0
    for _ in range(10):
        n = 8
        X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        X += 3 * np.eye(n)  # keep well conditioned for the Newton oracle
        worst = max(worst, operator_norm(polar(X) - _newton_polar(X)))
    check("polar vs Newton oracle", worst <= 1e-9, f"worst {worst:.2e}")

    worst = 0.0
    for _ in range(10):
        n = 16
        H = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        H = (H + H.conj().T) / 2
        dec = herm_eig(H)
        rec = (dec.vectors * dec.eigenvalues) @ dec.vectors.conj().T
        worst = max(worst, operator_norm(rec - H) / max(1.0, operator_norm(H)))
    check("eigendecomposition reconstruction", worst <= 1e-10, f"worst rel {worst:.2e}")

    A, B = voiculescu(16)
    law = abs(operator_norm(A @ B - B @ A) - abs(np.exp(2j * np.pi / 16) - 1))
    check("shift/clock commutator law", law <= 1e-12, f"residual {law:.2e}")

    rep = bott_index_unitaries(A, B)
    check("shift/clock Bott index", rep.value == 1, f"value {rep.value}")
    rep = pf_bott_unitaries(*selfdual_double(A, B))
    check("doubled pair Pfaffian-Bott", rep.value == -1, f"value {rep.value}")

    return 1 if failures else 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "gen": cmd_gen,
        "residual": cmd_residual,
        "index": cmd_index,
        "canonical": cmd_canonical,
        "wannier": cmd_wannier,
        "sweep": cmd_sweep,
        "selftest": cmd_selftest,
    }
    try:
        return handlers[args.verb](args)
    except ObstructionError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except ValidationError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

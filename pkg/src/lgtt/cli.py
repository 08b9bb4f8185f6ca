"""
Command-line front end.

Every subcommand reads a polynomial or family file (except ``moduli``),
prints a ``key: value`` report or CSV, and with ``--out`` writes the output
file plus ``<out>.manifest.json``. Exit status is 0 on success, 2 on usage
or input errors and 1 when a computation fails.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .io import (RunManifest, format_text, load_family, write_complex_csv, write_eigenfield, write_milnor_algebra,
                 write_probe_csv, write_report, write_tensor_csv, write_thimble_csv)
from .poly import ParseError, parse_complex


class UsageError(Exception):
    pass


def _complex_list(text: str) -> tuple:
    try:
        return tuple(complex(parse_complex(x.strip())) for x in text.split(",") if x.strip())
    except (ValueError, ParseError) as e:
        raise argparse.ArgumentTypeError(str(e))


def _complex(text: str) -> complex:
    try:
        return complex(parse_complex(text))
    except (ValueError, ParseError) as e:
        raise argparse.ArgumentTypeError(str(e))


def _common(p: argparse.ArgumentParser, file: bool = True):
    if file:
        p.add_argument("file", help="polynomial or family file (JSON)")
    p.add_argument("--tau", type=_complex, default=None, help="overrides the file's tau")
    p.add_argument("--t", type=_complex_list, default=None, help='comma-separated parameters, e.g. "0.3+0.1i,-1"')
    p.add_argument("--grid-R", type=float, default=None)
    p.add_argument("--grid-h", type=float, default=None)
    p.add_argument("--k", type=int, default=6, help="number of eigenpairs")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--strict", action="store_true", help="turn warnings into errors")
    p.add_argument("--out", default=None, help="output file (or prefix for thimbles)")
    p.add_argument("--format", choices=("csv", "text"), default="text")
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lgtt", description="Landau-Ginzburg spectra, thimbles and tt* checks")
    ap.add_argument("--version", action="version", version=f"lgtt {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="weights, invertible type, Milnor number, symmetries, tameness")
    _common(p)
    p.add_argument("--milnor", default=None, help="also write the Milnor algebra (basis, reduction table)")
    _common(sub.add_parser("newton", help="Newton polytope, convenience, nondegeneracy"))
    p = sub.add_parser("tame", help="strong-tameness certificate")
    _common(p)
    p.add_argument("--probe", action="store_true", help="attach a radial probe when no rule applies")
    p = sub.add_parser("spectrum", help="lowest eigenvalues of the twisted Laplacian (one variable)")
    _common(p)
    p.add_argument("--degree", type=int, default=1, choices=(0, 1, 2))
    p.add_argument("--zero-band", type=float, default=1e-2)
    p.add_argument("--fields", default=None, help="write eigenfields to PREFIX_k.txt")
    _common(sub.add_parser("thimbles", help="trace descending and ascending thimbles"))
    p = sub.add_parser("periods", help="period matrices over the canonical thimble bases")
    _common(p)
    p.add_argument("--mode", choices=("Holomorphic", "Twisted"), default="Holomorphic")
    p = sub.add_parser("monodromy", help="monodromy of the thimble basis around the tau circle")
    _common(p)
    p.add_argument("--steps", type=int, default=96)
    p.add_argument("--half", action="store_true", help="half loop tau -> -tau (Witten map)")
    p = sub.add_parser("frobenius", help="Higgs fields, pairing and optional tt* residuals")
    _common(p)
    p.add_argument("--ttstar", action="store_true", help="also compute tt* residuals (slow)")
    p.add_argument("--connection", action="store_true", help="also compute period connection residuals")
    p.add_argument("--tensor", default=None, help="write A_ijk = tau eta(d_i f d_j f d_k f) as CSV")
    p = sub.add_parser("moduli", help="moduli dimension vs marginal deformations of a Fermat hypersurface")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "text"), default="text")
    p.add_argument("--strict", action="store_true")
    return ap


# --------------------------------------------------------------------------
# commands: each returns (report dict, optional csv writer)

def _family(args, manifest):
    path = Path(args.file)
    if not path.exists():
        raise UsageError(f"no such file: {path}")
    try:
        fam = load_family(path)
    except (ValueError, KeyError, ParseError, json.JSONDecodeError) as e:
        raise UsageError(f"invalid input file {path}: {e}")
    manifest.add_input(path)
    if args.t is not None and len(args.t) != fam.nparams:
        raise UsageError(f"--t needs {fam.nparams} values, got {len(args.t)}")
    return fam.at(t=args.t, tau=args.tau)


def cmd_analyze(args, fam, manifest):
    from .poly import InfiniteGroupError, classify_invertible, diagonal_symmetries, quasi_weights
    from .singularity import milnor_algebra
    from .tame import tameness_certificate

    f = fam.member() if fam.nparams else fam.base
    q = quasi_weights(f)
    inv = classify_invertible(f)
    rep = {"polynomial": str(f), "weights": [str(x) for x in q.q] if q else "none"}
    rep["invertible"] = " + ".join(str(b) for b in inv) if inv else f"no ({inv.reason})"
    if f.is_polynomial:
        A = milnor_algebra(f)
        rep["mu"] = A.mu if A.finite else "infinite"
        if A.finite:
            rep["milnor_basis"] = A.basis_labels()
        if args.milnor:
            write_milnor_algebra(args.milnor, A)
            manifest.outputs.append(Path(args.milnor).name)
    try:
        G = diagonal_symmetries(f)
        rep["symmetry_order"] = G.order
        rep["symmetry_generators"] = [[str(x) for x in g] for g in G.generators]
    except InfiniteGroupError as e:
        rep["symmetry_order"] = f"infinite ({e})"
    rep["tameness"] = str(tameness_certificate(fam, seed=args.seed))
    return rep, None


def cmd_newton(args, fam, manifest):
    from .newton import is_convenient, is_nondegenerate_laurent, newton_polytope

    f = fam.base
    P = newton_polytope(f)
    cert = is_nondegenerate_laurent(f, seed=args.seed)
    manifest.tolerances["nondegeneracy_trials"] = cert.trials
    rep = {"vertices": [list(v) for v in P.vertices], "dim": P.dim,
           "faces": {k: len(P.face_of_dim(k)) for k in range(P.dim)},
           "interior_points": [list(v) for v in P.interior_points],
           "convenient": is_convenient(f), "nondegenerate": cert.kind}
    return rep, None


def cmd_tame(args, fam, manifest):
    from .tame import tameness_certificate

    cert = tameness_certificate(fam, probe=args.probe, seed=args.seed)
    rep = {"verdict": cert.verdict, "rule": cert.rule or "none", "reason": cert.reason}
    if cert.probe is not None:
        rep["probe_radii"] = list(cert.probe.radii)
        rep["probe_min"] = list(cert.probe.min_values)
        rep["probe_growing"] = cert.probe.growing
        return rep, lambda path: write_probe_csv(path, cert.probe)
    return rep, None


def cmd_spectrum(args, fam, manifest):
    from .spectral import (Indeterminate, SpectralGrid, assemble_twisted_laplacian, harmonic_dimension,
                           lowest_eigenpairs)

    R = args.grid_R or 6.0
    h = args.grid_h or 1 / 16
    tol = args.tol or 1e-8
    grid = SpectralGrid(R, h)
    op = assemble_twisted_laplacian(fam, args.degree, grid, strict=args.strict)
    res = lowest_eigenpairs(op, k=args.k, tol=tol, seed=args.seed)
    manifest.grid.update({"R": R, "h": h, "degree": args.degree})
    manifest.tolerances.update({"eigen_tol": tol, "zero_band": args.zero_band})
    rep = {"eigenvalues": np.asarray(res.eigenvalues), "residuals": np.asarray(res.residuals)}
    try:
        rep["harmonic_dimension"] = harmonic_dimension(res, args.zero_band)
    except Indeterminate as e:
        rep["harmonic_dimension"] = f"indeterminate ({e})"
    if args.fields:
        for k, (lam, fld) in enumerate(zip(res.eigenvalues, res.eigenfields)):
            name = f"{args.fields}_{k + 1}.txt"
            write_eigenfield(name, fld, lam)
            manifest.outputs.append(Path(name).name)

    def csv_out(path):
        write_complex_csv(path, np.asarray(res.eigenvalues).reshape(-1, 1), ["lambda"], index_name="k")
    return rep, csv_out


def _one_variable(fam):
    if fam.base.nvars != 1 or not fam.base.is_polynomial:
        raise UsageError("this subcommand needs a one-variable polynomial")


def _off_wall(fam, manifest):
    from .thimble import off_wall_tau

    tau, eps = off_wall_tau(fam, fam.tau, fam.t)
    if eps:
        manifest.perturbations.append({"tau_phase": eps})
    return fam.at(tau=tau)


def cmd_thimbles(args, fam, manifest):
    from .thimble import critical_points, trace_thimble

    _one_variable(fam)
    fam = _off_wall(fam, manifest)
    tau, t = complex(fam.tau), fam.t
    cd = critical_points(fam, tau, t)
    jobs = [(a, s) for a in range(len(cd.points)) for s in "-+"]
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as ex:
        ths = list(ex.map(lambda job: trace_thimble(fam, tau, t, a=job[0], sign=job[1], crit=cd), jobs))
    manifest.tolerances["phase_error_max"] = max(th.phase_error for th in ths)
    rep = {"tau": tau, "t": list(t), "tau_phase": manifest.perturbations[-1]["tau_phase"] if manifest.perturbations else 0.0,
           "critical_points": cd.points, "critical_values": cd.values,
           "phase_errors": [th.phase_error for th in ths]}
    if args.out:
        written = []
        for (a, s), th in zip(jobs, ths):
            name = f"{args.out}_{a + 1}{'minus' if s == '-' else 'plus'}.csv"
            write_thimble_csv(name, th)
            written.append(name)
        manifest.outputs.extend(Path(n).name for n in written)
        rep["files"] = written
    return rep, None


def cmd_periods(args, fam, manifest):
    from .thimble import period_matrix

    _one_variable(fam)
    fam = _off_wall(fam, manifest)
    rtol = args.tol or 1e-12
    pm = period_matrix(fam, mode=args.mode, rtol=rtol)
    manifest.tolerances["quadrature_rtol"] = rtol
    rep = {"mode": pm.mode, "tau": pm.tau, "tau_phase": manifest.perturbations[-1]["tau_phase"] if manifest.perturbations else 0.0, "t": list(pm.t), "forms": pm.labels,
           "minus": pm.minus, "plus": pm.plus, "primitive": pm.primitive, "eta": pm.eta,
           "quadrature_error": float(np.max(pm.errors))}

    def csv_out(path):
        mu = len(pm.points)
        rows = np.hstack([np.vstack([pm.minus, pm.plus]), pm.primitive.reshape(-1, 1)])
        labels = [f"C{a + 1}-" for a in range(mu)] + [f"C{a + 1}+" for a in range(mu)]
        write_complex_csv(path, rows, list(pm.labels) + ["vol"], labels, "thimble")
    return rep, csv_out


def cmd_monodromy(args, fam, manifest):
    from .thimble import monodromy_along_loop, tau_loop, witten_map

    _one_variable(fam)
    tau, t = complex(fam.tau), fam.t
    if args.half:
        S = witten_map(fam, tau, t, steps=args.steps)
        rep = {"loop": "half tau circle", "matrix": S, "square": S @ S}
        return rep, lambda path: write_complex_csv(path, S)
    res = monodromy_along_loop(fam, tau_loop(tau, t, args.steps))
    manifest.perturbations.extend(to_list(res.perturbations))
    rep = {"loop": "tau circle", "matrix": res.matrix, "eigenvalues": res.eigenvalues,
           "semisimple": res.semisimple, "order": res.order, "nilpotency": res.nilpotency,
           "walls_crossed": len(res.walls), "perturbations": len(res.perturbations)}
    return rep, lambda path: write_complex_csv(path, res.matrix)


def to_list(x):
    return [str(v) for v in x]


def cmd_frobenius(args, fam, manifest):
    from .frobenius import connection_residuals, frobenius_data, ttstar_residuals

    fd = frobenius_data(fam)
    rep = {"basis": fd.labels, "eta": fd.eta, "U": fd.U, "commutator": fd.commutator_norm(),
           "symmetry_defect": fd.symmetry_defect()}
    for i, B in enumerate(fd.B):
        rep[f"B{i + 1}"] = B
    if args.connection:
        _one_variable(fam)
        c = connection_residuals(fam)
        rep.update({"derivative_residual": c.derivative, "euler_literal": c.euler_literal,
                    "euler_exact": c.euler_exact, "flatness": c.flatness})
    if args.ttstar:
        _one_variable(fam)
        R = args.grid_R or 3.0
        h = args.grid_h or 1 / 16
        levels = ((R, h, 0.2), (R, h / 2, 0.1))
        manifest.grid.update({"levels": [list(x) for x in levels]})
        r = ttstar_residuals(fam, levels=levels)
        rep.update({"cv_residual": r.cv, "fantastic_residual": r.fantastic,
                    "cv_decreasing": r.cv_decreasing, "fantastic_decreasing": r.fantastic_decreasing})
    if args.tensor:
        from .frobenius import frobenius_tensor

        A = frobenius_tensor(fam, [fam.t], fam.tau).A[0]
        write_tensor_csv(args.tensor, A)
        manifest.outputs.append(Path(args.tensor).name)

    def csv_out(path):
        mats = [("eta", fd.eta), ("U", fd.U)] + [(f"B{i + 1}", B) for i, B in enumerate(fd.B)]
        rows = np.vstack([m for _, m in mats])
        index = [f"{name}[{a + 1}]" for name, m in mats for a in range(m.shape[0])]
        write_complex_csv(path, rows, fd.labels, index, "matrix_row")
    return rep, csv_out


COMMANDS = {
    "analyze": cmd_analyze, "newton": cmd_newton, "tame": cmd_tame, "spectrum": cmd_spectrum,
    "thimbles": cmd_thimbles, "periods": cmd_periods, "monodromy": cmd_monodromy, "frobenius": cmd_frobenius,
}


def _emit(args, rep, csv_out, manifest):
    if args.format == "csv" and csv_out is not None and not args.out:
        import tempfile

        with tempfile.NamedTemporaryFile("r", suffix=".csv", delete=True) as tmp:
            csv_out(tmp.name)
            sys.stdout.write(Path(tmp.name).read_text())
    else:
        sys.stdout.write(format_text(rep))
    if args.out and args.command != "thimbles":
        if args.format == "csv" and csv_out is not None:
            csv_out(args.out)
        elif args.out.endswith(".json"):
            write_report(args.out, rep)
        else:
            Path(args.out).write_text(format_text(rep))
    if args.out:
        manifest.finish()
        manifest.write(args.out)
    elif manifest.outputs:
        manifest.finish()
        manifest.write(_extra_path(args))


def _extra_path(args):
    for name in ("milnor", "fields", "tensor"):
        v = getattr(args, name, None)
        if v:
            return v if name != "fields" else f"{v}_1.txt"
    return "lgtt-run"


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    manifest = RunManifest(command=["lgtt"] + argv, seed=getattr(args, "seed", 0))
    manifest.tolerances["threads"] = getattr(args, "threads", 1)
    with warnings.catch_warnings():
        if args.strict:
            warnings.simplefilter("error")
        try:
            if args.command == "moduli":
                from .singularity import moduli_count

                m = moduli_count(args.n, args.d)
                line = f"moduli_dim={m.moduli_dim} marginal={m.marginal_count} match={'yes' if m.match else 'no'}"
                sys.stdout.write(line + (f" note={m.note!r}" if m.note else "") + "\n")
                if args.out:
                    Path(args.out).write_text(line + "\n")
                    manifest.finish()
                    manifest.write(args.out)
                return 0
            fam = _family(args, manifest)
            rep, csv_out = COMMANDS[args.command](args, fam, manifest)
            _emit(args, rep, csv_out, manifest)
            return 0
        except UsageError as e:
            print(f"lgtt: error: {e}", file=sys.stderr)
            return 2
        except Exception as e:  # computation failures
            print(f"lgtt: {args.command} failed: {type(e).__name__}: {e}", file=sys.stderr)
            return 1


if __name__ == "__main__":
    sys.exit(main())

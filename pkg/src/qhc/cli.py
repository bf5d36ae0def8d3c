"""Command-line front end: ``qhc <subcommand> [flags]``.

Exit codes: 0 success (an UNSAT verdict is a success), 1 domain or input
error, 2 usage error.  Every subcommand is deterministic given ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import SCHEMA_VERSION, _config
from . import io as qio

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _emit(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _emit_json(obj, path):
    _emit(json.dumps(obj, indent=1) + "\n", path)


# ---------------------------------------------------------------------------
# shared model flags


def _model_flags(p):
    g = p.add_argument_group("model")
    g.add_argument("--input", help="Hamiltonian JSON file (instead of --model)")
    g.add_argument("--model", choices=["tfim", "heisenberg", "xxz", "xx", "afm", "aklt", "ising"])
    g.add_argument("--n", type=int)
    g.add_argument("--bc", choices=["open", "periodic"], default="open")
    g.add_argument("--J", type=float, default=1.0)
    g.add_argument("--g", type=float, default=1.0)
    g.add_argument("--h", type=float, default=0.0)
    g.add_argument("--Jx", type=float, default=1.0)
    g.add_argument("--Jy", type=float, default=1.0)
    g.add_argument("--Jz", type=float, default=1.0)


def _hamiltonian(args):
    from .hamiltonian import build_model

    if args.input:
        return qio.load_hamiltonian(args.input)
    if args.model is None or args.n is None:
        raise _Usage("either --input or both --model and --n are required")
    return build_model(args.model, args.n, args.bc, J=args.J, g=args.g, h=args.h,
                       Jx=args.Jx, Jy=args.Jy, Jz=args.Jz)


class _Usage(Exception):
    pass


def _ground(H, cap):
    from .spectra import lanczos_ground

    return lanczos_ground(H, cap=cap)


# ---------------------------------------------------------------------------
# subcommands


def cmd_build(args):
    H = _hamiltonian(args)
    _emit_json(qio.hamiltonian_to_json(H), args.output)


def cmd_spectrum(args):
    from .spectra import dense_spectrum, spectrum_csv

    res = dense_spectrum(_hamiltonian(args), cap=args.dense_cap)
    _emit(spectrum_csv(res.eigenvalues), args.output)


def cmd_gibbs(args):
    from .hamiltonian import assemble
    from .spectra import csv_table, gibbs_expectation, log_partition_function

    M = assemble(_hamiltonian(args), args.dense_cap)
    rows = [(b, gibbs_expectation(M, b), log_partition_function(M, b)) for b in args.beta]
    _emit(csv_table(["beta", "energy", "log_Z"], rows), args.output)


def cmd_correlate(args):
    from .hamiltonian import spin_operators
    from .spectra import correlation_csv, correlation_table

    H = _hamiltonian(args)
    _, psi = _ground(H, args.lanczos_cap)
    from fractions import Fraction

    spin = Fraction(H.dims[0] - 1, 2)
    ops = spin_operators(spin)
    O = {"x": ops.sx, "y": ops.sy, "z": ops.sz}[args.op]
    _emit(correlation_csv(correlation_table(psi, O, H.dims)), args.output)


def cmd_entropy(args):
    from .spectra import entanglement_entropy, entropy_csv

    H = _hamiltonian(args)
    _, psi = _ground(H, args.lanczos_cap)
    rows = [(c, entanglement_entropy(psi, c, H.dims)) for c in range(1, H.n)]
    _emit(entropy_csv(rows), args.output)


def cmd_meanfield(args):
    from .meanfield import mf_magnetization_vs_T
    from .spectra import csv_table

    if args.T_steps < 1:
        raise _Usage("--T-steps must be >= 1")
    T = np.linspace(args.T_min, args.T_max, args.T_steps)
    rows = mf_magnetization_vs_T(args.D, args.J, T)
    _emit(csv_table(["T", "m", "F_mf_per_site"], rows), args.output)


def cmd_dmrg(args):
    from .spectra import csv_table
    from .tensornet.dmrg import dmrg_run

    H = _hamiltonian(args)
    res = dmrg_run(H, args.D, sweeps=args.sweeps, tol=args.tol, seed=args.seed)
    rows = [(i + 1, e) for i, e in enumerate(res.sweep_energies)]
    _emit(csv_table(["sweep", "energy"], rows), args.output)
    if args.mps_output:
        qio.write_json(args.mps_output, qio.mps_to_json(res.mps))


def cmd_mera(args):
    from .tensornet.mera import mera_build_random, mera_causal_rdm

    net = mera_build_random(args.n, seed=args.seed)
    rho, info = mera_causal_rdm(net, args.site, return_count=True)
    _emit_json({"n": args.n, "site": args.site, "seed": args.seed, "tensors_touched": info["tensors"],
                "max_legs": info["max_legs"], "rdm": qio.complex_to_json(rho.matrix)}, args.output)


def cmd_qsat2(args):
    from .qsat2 import dense_oracle, max_clause_residual, random_instance, solve

    if args.input:
        inst = qio.qsat_from_json(qio.read_json(args.input))
    elif args.n is not None and args.clauses is not None:
        inst = random_instance(args.n, args.clauses, np.random.default_rng(args.seed))
    else:
        raise _Usage("either --input or both --n and --clauses are required")
    if args.instance_output:
        qio.write_json(args.instance_output, qio.qsat_to_json(inst))
    res = solve(inst)
    out = qio.qsat_resolution_to_json(res, inst.n)
    if res.verdict == "SAT":
        out["max_clause_residual"] = max_clause_residual(inst, res.state(inst.n))
    if args.verify:
        if inst.n > 10:
            raise ValueError("--verify runs the dense oracle, which is limited to n <= 10")
        sat, _ = dense_oracle(inst, basis=False)
        out["oracle"] = "SAT" if sat else "UNSAT"
        out["agrees"] = (res.verdict == "SAT") == sat
    _emit_json(out, args.output)


def cmd_compile_kitaev(args):
    from . import clock

    if args.input:
        circ = qio.circuit_from_json(qio.read_json(args.input))
    elif args.toy == "yes":
        circ = clock.toy_yes_circuit(args.L)
    elif args.toy == "no":
        circ = clock.toy_no_circuit(args.L)
    else:
        raise _Usage("either --input or --toy {yes,no} is required")
    ch = clock.compile_circuit(circ, args.encoding, args.h_in, cap=args.dense_cap)
    H = ch.total()
    if args.emit_hamiltonian:
        qio.save_hamiltonian(H, args.emit_hamiltonian)
    p, _ = clock.best_proof(circ)
    out = {"encoding": args.encoding, "N": circ.N, "m": circ.m, "L": circ.L, "n_sites": H.n,
           "dims": list(H.dims), "terms": len(H.terms), "locality": H.locality,
           "max_acceptance": p, "parts": {k: len(v.terms) for k, v in ch.parts.items()}}
    if args.spectrum:
        from .spectra import dense_spectrum

        res = dense_spectrum(H, cap=args.dense_cap)
        out["lambda_min"] = res.ground_energy
        out["gap"] = res.gap
    if args.history_energy:
        obj = qio.read_json(args.history_energy)
        if isinstance(obj, dict) and "proof" in obj:
            obj = obj["proof"]
        proof = qio.complex_from_json(obj, "proof", (2**circ.m,))
        eta = clock.history_state(circ, proof, args.encoding, cap=args.dense_cap)
        out["history_energy"] = float(H.expectation(eta))
        out["history_bound"] = (1 - clock.acceptance_probability(circ, proof)) / (circ.L + 1)
    _emit_json(out, args.output)


def cmd_gadget(args):
    from .gadgets import decompose_3local, gadget_csv, validate_gadget, zzz_hamiltonian

    H = qio.load_hamiltonian(args.input) if args.input else zzz_hamiltonian()
    dec = decompose_3local(H)
    _emit(gadget_csv(validate_gadget(dec, args.delta_grid)), args.output)


def _operator(path):
    from .hamiltonian import assemble

    return assemble(qio.load_hamiltonian(path))


def cmd_commuting(args):
    from .commuting import decomposition_to_json, decoupled_ground_energy, dense_ground_energy, structure_decompose

    if len(args.dims) != 3:
        raise _Usage("--dims needs three integers dimX,dimY,dimZ")
    A, B = _operator(args.a), _operator(args.b)
    dec = structure_decompose(A, B, tuple(args.dims), seed=args.seed)
    out = decomposition_to_json(dec)
    out["decoupled_ground_energy"] = decoupled_ground_energy(A, B, dec)
    out["dense_ground_energy"] = dense_ground_energy(A, B, tuple(args.dims))
    _emit_json(out, args.output)


def cmd_agsp(args):
    from . import agsp
    from .spectra import csv_table

    H = _hamiltonian(args)
    cut = args.cut if args.cut is not None else H.n // 2
    target = H
    trunc = None
    if args.s is not None:
        target = agsp.truncate_hamiltonian(H, cut, args.s, args.t)
        trunc = {"s": args.s, "t": args.t, "window": list(target.window), "norm_bound": target.norm_bound}
    certs = []
    for ell in args.ell:
        c = agsp.build_agsp(target, ell, cut, eps=args.eps, shift=args.shift, cap=args.dense_cap)
        certs.append(c.to_json())
    out = {"n": H.n, "cut": cut, "truncation": trunc, "certificates": certs}
    _emit_json(out, args.output)
    if args.scan_output:
        rows = agsp.area_law_scan(args.model or "tfim", args.scan_g, args.scan_n, J=args.J, cap=args.lanczos_cap)
        _emit(csv_table(["n", "g", "entropy"], rows), args.scan_output)


# ---------------------------------------------------------------------------
# parser


def build_parser():
    p = argparse.ArgumentParser(prog="qhc", description="Quantum Hamiltonian complexity workbench")
    p.add_argument("--version", action="version", version=SCHEMA_VERSION)
    p.add_argument("--dense-cap", type=int, default=_config.DENSE_CAP)
    p.add_argument("--lanczos-cap", type=int, default=_config.LANCZOS_CAP)
    sub = p.add_subparsers(dest="cmd", metavar="subcommand")
    sub.required = True

    def add(name, func, help_, model=False):
        sp = sub.add_parser(name, help=help_)
        if model:
            _model_flags(sp)
        sp.add_argument("--output", "-o", help="output file (default stdout)")
        sp.set_defaults(func=func)
        return sp

    add("build", cmd_build, "write a model Hamiltonian as JSON", model=True)
    add("spectrum", cmd_spectrum, "all eigenvalues as CSV", model=True)
    sp = add("gibbs", cmd_gibbs, "thermal energy and log Z over a beta list", model=True)
    sp.add_argument("--beta", type=_floats, default=[0.5, 1.0, 2.0])
    sp = add("correlate", cmd_correlate, "ground-state two-point correlations", model=True)
    sp.add_argument("--op", choices=["x", "y", "z"], default="z")
    add("entropy", cmd_entropy, "ground-state entanglement entropy per cut", model=True)

    sp = add("meanfield", cmd_meanfield, "mean-field magnetization versus temperature")
    sp.add_argument("--D", type=int, required=True)
    sp.add_argument("--J", type=float, default=1.0)
    sp.add_argument("--T-min", dest="T_min", type=float, required=True)
    sp.add_argument("--T-max", dest="T_max", type=float, required=True)
    sp.add_argument("--T-steps", dest="T_steps", type=int, required=True)

    sp = add("dmrg", cmd_dmrg, "single-site DMRG energies per sweep", model=True)
    sp.add_argument("--D", type=int, default=16)
    sp.add_argument("--sweeps", type=int, default=20)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--mps-output", help="write the final MPS as JSON")

    sp = add("mera", cmd_mera, "one-site reduced density matrix of a random MERA via its causal cone")
    sp.add_argument("--n", type=int, default=8)
    sp.add_argument("--site", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("qsat2", cmd_qsat2, "solve a Quantum 2-SAT instance")
    sp.add_argument("--input")
    sp.add_argument("--n", type=int)
    sp.add_argument("--clauses", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--verify", action="store_true")
    sp.add_argument("--instance-output", help="write the (generated) instance as JSON")

    sp = add("compile-kitaev", cmd_compile_kitaev, "circuit to clock Hamiltonian")
    sp.add_argument("--input", help="circuit JSON")
    sp.add_argument("--toy", choices=["yes", "no"])
    sp.add_argument("--L", type=int, default=3)
    sp.add_argument("--encoding", choices=["direct", "unary"], default="direct")
    sp.add_argument("--h-in", dest="h_in", choices=["printed", "split"], default="printed")
    sp.add_argument("--emit-hamiltonian")
    sp.add_argument("--history-energy", help="JSON file with the proof state {re, im}")
    sp.add_argument("--spectrum", action="store_true", help="also report lambda_min and the gap")

    sp = add("gadget", cmd_gadget, "3-to-2-local gadget closeness over a delta grid")
    sp.add_argument("--input", help="3-local Hamiltonian JSON (default: ZZZ)")
    sp.add_argument("--delta-grid", type=_floats, default=[0.1, 0.05, 0.025])

    sp = add("commuting", cmd_commuting, "Structure-Lemma decomposition of a commuting pair")
    sp.add_argument("--a", required=True, help="operator on X (x) Y, Hamiltonian JSON")
    sp.add_argument("--b", required=True, help="operator on Y (x) Z, Hamiltonian JSON")
    sp.add_argument("--dims", type=_ints, required=True, help="dimX,dimY,dimZ")
    sp.add_argument("--seed", type=int, default=0)

    sp = add("agsp", cmd_agsp, "Chebyshev AGSP certificate and area-law scan", model=True)
    sp.add_argument("--cut", type=int)
    sp.add_argument("--ell", type=_ints, default=[2, 4, 8])
    sp.add_argument("--eps", type=float, help="gap used by the polynomial (default: measured)")
    sp.add_argument("--s", type=int, help="truncate outside an s-bond window")
    sp.add_argument("--t", type=float, default=1.0)
    sp.add_argument("--shift", action="store_true", help="use H - E0 for frustrated chains")
    sp.add_argument("--scan-output", help="write an entropy scan CSV")
    sp.add_argument("--scan-n", type=_ints, default=list(range(6, 13)))
    sp.add_argument("--scan-g", type=_floats, default=[2.0, 1.0])
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        args.func(args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"qhc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, OSError, RuntimeError, LookupError, TypeError, np.linalg.LinAlgError) as exc:
        print(f"qhc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

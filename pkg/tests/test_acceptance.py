"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (the lines appear in the
terminal summary) or directly with ``python tests/test_acceptance.py``.
"""

import sys

import numpy as np

from qhc.agsp import agsp_power, area_law_scan, build_agsp, repeated_application
from qhc.clock import (
    QuantumCircuit, SWAP, acceptance_probability, clock_geometric_report, clock_matrix, clock_spectrum,
    compile_circuit, geometric_bound, history_state, param_verifier, ry, toy_no_circuit, toy_yes_circuit,
)
from qhc.commuting import (
    decoupled_ground_energy, dense_ground_energy, planted_pair, random_block_dims, structure_decompose,
)
from qhc.gadgets import (
    build_gadget, decompose_3local, effective_hamiltonian, random_single_triple, validate_gadget, zzz_hamiltonian,
)
from qhc.hamiltonian import (
    CnfFormula, LocalHamiltonian, LocalTerm, assemble, build_aklt, build_heisenberg, build_tfim, embed_cnf,
    embed_operator, spin_operators,
)
from qhc.meanfield import critical_temperature, mf_free_energy, solve_mf
from qhc.qsat2 import dense_oracle, generate_constraints, max_clause_residual, random_instance, solve
from qhc.spectra import (
    dense_spectrum, gibbs_expectation, lanczos_ground, reduced_density, schmidt_rank, sim_expectation,
    two_point_correlation,
)
from qhc.tensornet.dmrg import dmrg_run
from qhc.tensornet.mera import mera_build_random, mera_causal_rdm, mera_state

RESULTS = []


def record(num, title, checks):
    """Store and print the verdict line, then fail the test on any failed check."""
    failed = [name for name, ok in checks.items() if not ok]
    line = f"[{'PASS' if not failed else 'FAIL'}] {num:>2}. {title}"
    if failed:
        line += "  (failed: " + ", ".join(failed) + ")"
    RESULTS.append(line)
    print(line)
    assert not failed, line


# ---------------------------------------------------------------------------
# 1. CSP embedding


def dpll(clauses, assign=None):
    """Plain DPLL with unit propagation; returns True iff satisfiable."""
    assign = dict(assign or {})
    while True:
        unit = None
        for c in clauses:
            if any(assign.get(abs(l)) == (l > 0) for l in c):
                continue
            free = [l for l in c if abs(l) not in assign]
            if not free:
                return False
            if len(free) == 1:
                unit = free[0]
                break
        if unit is None:
            break
        assign[abs(unit)] = unit > 0
    open_ = [l for c in clauses if not any(assign.get(abs(x)) == (x > 0) for x in c) for l in c
             if abs(l) not in assign]
    if not open_:
        return True
    v = abs(open_[0])
    return dpll(clauses, {**assign, v: True}) or dpll(clauses, {**assign, v: False})


def test_criterion_01_csp_embedding():
    rng = np.random.default_rng(101)
    agree = gap_ok = True
    n_sat = n_unsat = 0
    for _ in range(200):
        n = int(rng.integers(6, 15))
        m = int(round(n * rng.uniform(3.5, 5.5)))
        cl = []
        for _ in range(m):
            vs = rng.choice(np.arange(1, n + 1), 3, replace=False)
            cl.append(tuple(int(v) * int(s) for v, s in zip(vs, rng.choice([-1, 1], 3))))
        lam, _ = lanczos_ground(embed_cnf(CnfFormula(n, cl)))
        sat = dpll(cl)
        n_sat += sat
        n_unsat += not sat
        agree &= (abs(lam) < 1e-8) == sat
        if not sat:
            gap_ok &= lam >= 1 - 1e-8
    record(1, f"CSP embedding: 200 random 3-SAT ({n_sat} SAT, {n_unsat} UNSAT)",
           {"lambda_min = 0 iff SAT": agree, "lambda_min >= 1 when UNSAT": gap_ok,
            "both outcomes sampled": n_sat > 0 and n_unsat > 0})


# ---------------------------------------------------------------------------
# 2. mean field


def test_criterion_02_mean_field():
    tc = all(critical_temperature(D, J) == 2 * D * J for D in (1, 2, 3, 4) for J in (0.5, 1.0, 1.7))
    counts = True
    order = True
    stationary = True
    for D in (1, 2, 3):
        for J in (0.5, 1.0, 2.0):
            for a in (0.5, 0.9, 0.999, 1.001, 1.1, 2.0, 5.0):
                beta = a / (2 * D * J)
                roots = solve_mf(beta, D, J)
                counts &= len(roots) == (1 if a <= 1 else 3)
                m0 = max(roots)
                if m0 > 0:
                    F0 = mf_free_energy(0.0, beta, D, J)
                    order &= mf_free_energy(m0, beta, D, J) < F0 and mf_free_energy(-m0, beta, D, J) < F0
                h = 1e-6
                for m in roots:
                    d = (mf_free_energy(m + h, beta, D, J) - mf_free_energy(m - h, beta, D, J)) / (2 * h)
                    stationary &= abs(d) < 1e-4
    record(2, "Mean field: T_c = 2DJ, transition at 2 beta D J = 1, F ordering, dF/dm = 0",
           {"T_c": tc, "solution count": counts, "F(+-m0) < F(0)": order, "stationary": stationary})


# ---------------------------------------------------------------------------
# 3. AKLT


def test_criterion_03_aklt():
    deg_p = dense_spectrum(build_aklt(6, "periodic")).ground_degeneracy
    deg_o = dense_spectrum(build_aklt(6, "open")).ground_degeneracy
    # edge-up member of the open ground space, selected by a weak field that commutes with H
    n = 8
    sz = spin_operators(1).sz
    field = LocalHamiltonian(n, 3, [LocalTerm((i,), -0.1 * sz) for i in range(n)])
    e, psi = lanczos_ground(build_aklt(n) + field)
    in_ground = abs(build_aklt(n).expectation(psi) + 2 / 3 * (n - 1)) < 1e-8
    rank = schmidt_rank(psi, n // 2, (3,) * n)
    _, v = lanczos_ground(build_aklt(8, "periodic"))
    C = np.array([two_point_correlation(v, sz, sz, 0, r, (3,) * 8).real for r in range(1, 5)])
    r = np.arange(1, 5)
    y = np.log(np.abs(C))
    res = y - np.polyval(np.polyfit(r, y, 1), r)
    R2 = 1 - res @ res / np.sum((y - y.mean()) ** 2)
    record(3, f"AKLT: degeneracy {deg_p}/{deg_o}, mid-cut Schmidt rank {rank}, decay R^2 = {R2:.3f}",
           {"periodic 1": deg_p == 1, "open 4": deg_o == 4, "ground state": in_ground, "rank 2": rank == 2,
            "R^2 > 0.95": R2 > 0.95})


# ---------------------------------------------------------------------------
# 4. DMRG


def test_criterion_04_dmrg():
    errs, mono = [], True
    for g in (0.5, 1.0, 2.0):
        H = build_tfim(12, g=g)
        E0, _ = lanczos_ground(H)
        res = dmrg_run(H, 16, sweeps=20, tol=1e-12, seed=0)
        errs.append(abs(res.energy - E0))
        mono &= bool(np.all(np.diff(res.trace) <= 1e-10 * abs(E0)))
    record(4, f"DMRG: TFIM n=12, D=16, max |E - E0| = {max(errs):.1e}",
           {"|dE| < 1e-7": max(errs) < 1e-7, "monotone": mono})


# ---------------------------------------------------------------------------
# 5. MERA


def test_criterion_05_mera():
    worst = 0.0
    for seed in range(50):
        net = mera_build_random(8, seed=seed)
        psi = mera_state(net)
        for s in range(8):
            ref = reduced_density(psi, [s], (2,) * 8).matrix
            worst = max(worst, float(np.abs(mera_causal_rdm(net, s).matrix - ref).max()))
    counts = []
    for n in (4, 8, 16):
        net = mera_build_random(n, seed=1)
        counts.append(max(mera_causal_rdm(net, s, return_count=True)[1]["tensors"] for s in range(n)))
    x = np.log2([4, 8, 16])
    res = counts - np.polyval(np.polyfit(x, counts, 1), x)
    R2 = 1 - res @ res / np.sum((counts - np.mean(counts)) ** 2)
    record(5, f"MERA: cone vs full contraction {worst:.1e}, tensors touched {counts} (log-fit R^2 {R2:.3f})",
           {"rdm < 1e-10": worst < 1e-10, "increasing": counts[0] < counts[1] < counts[2], "log growth": R2 > 0.98})


# ---------------------------------------------------------------------------
# 6. Quantum 2-SAT


def test_criterion_06_qsat2():
    rng = np.random.default_rng(606)
    agree = resid_ok = annihilate = True
    n_sat = n_unsat = n_checked = 0
    worst = 0.0
    for k in range(500):
        n = int(rng.integers(3, 11))
        kind = k % 4
        if kind == 0:
            inst = random_instance(n, int(rng.integers(1, n + 1)), rng, ranks=(1,))
        elif kind == 1:
            inst = random_instance(n, int(rng.integers(n - 1, 2 * n)), rng, ranks=(1,), graph="path")
        elif kind == 2:
            inst = random_instance(n, int(rng.integers(1, n)), rng, ranks=(1, 2))
        else:
            inst = random_instance(n, int(rng.integers(1, n + 2)), rng, ranks=(1, 2, 3))
        res = solve(inst)
        sat = dense_oracle(inst, basis=False)[0]
        agree &= (res.verdict == "SAT") == sat
        if res.verdict == "SAT":
            n_sat += 1
            r = max_clause_residual(inst, res.state(n))
            worst = max(worst, r)
            resid_ok &= r < 1e-8
        else:
            n_unsat += 1
        if sat and n <= 8:
            _, null = dense_oracle(inst)
            work = inst
            for _ in range(30):
                work, added = generate_constraints(work)
                if added is None:
                    break
                a, c, phi = added
                sup, op = work.lift(a, c, np.outer(phi, phi.conj()))
                annihilate &= np.linalg.norm(embed_operator(op, sup, (2,) * n) @ null) < 1e-8
                n_checked += 1
    record(6, f"Quantum 2-SAT: 500 instances ({n_sat} SAT, {n_unsat} UNSAT), max residual {worst:.1e}, "
              f"{n_checked} generated clauses checked",
           {"verdicts": agree, "residual < 1e-8": resid_ok, "annihilation": annihilate,
            "both outcomes": n_sat > 0 and n_unsat > 0, "clauses generated": n_checked > 0})


# ---------------------------------------------------------------------------
# 7. clock construction


def test_criterion_07_clock():
    spec = all(np.allclose(np.linalg.eigvalsh(clock_matrix(L)), clock_spectrum(L), atol=1e-10) for L in range(1, 9))
    accept = True
    for enc in ("direct", "unary"):
        c = param_verifier(0.0, 3)
        eta = history_state(c, [0, 1], enc)
        accept &= np.vdot(eta, compile_circuit(c, enc).matrix() @ eta).real < 1e-10
    for L in (1, 3, 5):
        c = toy_yes_circuit(L)
        eta = history_state(c, [0, 1])
        accept &= np.vdot(eta, compile_circuit(c).matrix() @ eta).real < 1e-10
    bound = True
    proofs = [np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([0.6, 0.8]), np.array([1, 1j]) / np.sqrt(2)]
    for theta in np.linspace(0, np.pi, 9):
        for L in (2, 3, 5):
            c = param_verifier(theta, L)
            H = compile_circuit(c).matrix()
            for p in proofs:
                eta = history_state(c, p)
                eps = 1 - acceptance_probability(c, p)
                bound &= np.vdot(eta, H @ eta).real <= eps / (L + 1) + 1e-10
    rng = np.random.default_rng(707)
    geo = True
    for _ in range(100):
        d = int(rng.integers(2, 7))
        r1 = int(rng.integers(1, d))
        r2 = int(rng.integers(d - r1, d + 1))
        A1 = (lambda X: X @ X.conj().T)(rng.standard_normal((d, r1)) + 1j * rng.standard_normal((d, r1)))
        A2 = (lambda X: X @ X.conj().T)(rng.standard_normal((d, r2)) + 1j * rng.standard_normal((d, r2)))
        rep = geometric_bound(A1, A2)
        geo &= rep.bound <= np.linalg.eigvalsh(A1 + A2)[0] + 1e-9
    compiled = [toy_no_circuit(L) for L in (1, 2, 3, 4, 6)]
    compiled += [QuantumCircuit(2, 1, [((0, 1), SWAP), ((0,), ry(t)), ((1,), np.eye(2))]) for t in (0.3, 1.0, 2.0)]
    for c in compiled:
        ch = compile_circuit(c)
        rep = clock_geometric_report(ch)
        geo &= rep.bound <= np.linalg.eigvalsh(ch.matrix())[0] + 1e-9
    record(7, "Clock: factor spectrum L <= 8, accepting history energy, eps/(L+1) bound, geometric bound",
           {"spectrum": spec, "accepting < 1e-10": accept, "eps/(L+1)": bound, "geometric": geo})


# ---------------------------------------------------------------------------
# 8. gadget


def test_criterion_08_gadget():
    rng = np.random.default_rng(808)
    cases = [(zzz_hamiltonian(), 1.0)] + [(random_single_triple(rng), 0.5) for _ in range(20)]
    qspec = eff = close = True
    ratios = []
    for H, scale in cases:
        dec = decompose_3local(H, scale=scale)
        for delta in (0.1, 0.05, 0.025):
            w = np.linalg.eigvalsh(assemble(build_gadget(dec, delta).Q)) * delta**3
            qspec &= bool(np.all((np.abs(w) < 1e-9) | (np.abs(w - 1) < 1e-9)))
        lam_eff = np.linalg.eigvalsh(assemble(effective_hamiltonian(dec)))[0]
        eff &= abs(lam_eff - scale * np.linalg.eigvalsh(assemble(H))[0]) < 1e-9
        eps = [r[1] for r in validate_gadget(dec)]
        ratios.append(eps[2] / eps[0])
        close &= eps[0] > eps[1] > eps[2] and eps[2] / eps[0] < 0.5
    record(8, f"Gadget: 21 instances, worst eps(0.025)/eps(0.1) = {max(ratios):.3f}",
           {"Q spectrum {0, 1/delta^3}": qspec, "H_eff ground energy": eff, "closeness decreasing": close})


# ---------------------------------------------------------------------------
# 9. structure lemma


def test_criterion_09_structure_lemma():
    dims_ok = resid_ok = energy_ok = True
    worst = 0.0
    for seed in range(200):
        rng = np.random.default_rng(9000 + seed)
        bd = random_block_dims(rng, 12)
        dX, dZ = int(rng.integers(2, 4)), int(rng.integers(1, 3))
        A, B = planted_pair(bd, dX, dZ, rng)
        dY = sum(a * b for a, b in bd)
        dec = structure_decompose(A, B, (dX, dY, dZ), seed=seed)
        dims_ok &= sorted(dec.block_dims) == sorted(bd)
        r = max(max(x) for x in dec.residuals)
        worst = max(worst, r)
        resid_ok &= r < 1e-7
        energy_ok &= abs(decoupled_ground_energy(A, B, dec) - dense_ground_energy(A, B, (dX, dY, dZ))) < 1e-8
    record(9, f"Structure Lemma: 200 planted pairs, max conjugation residual {worst:.1e}",
           {"block dims": dims_ok, "residual < 1e-7": resid_ok, "decoupled energy": energy_ok})


# ---------------------------------------------------------------------------
# 10. AGSP


def test_criterion_10_agsp():
    H = build_tfim(8, g=2.0)
    certs = {ell: build_agsp(H, ell, 4, shift=True) for ell in (2, 4, 8)}
    inv = all(c.invariance_error < 1e-8 for c in certs.values())
    delta = all(c.Delta_measured <= c.Delta_bound + 1e-8 for c in certs.values())
    c2 = certs[2]
    p = agsp_power(c2, 2)
    power = p.Delta_measured <= c2.Delta_measured**2 + 1e-8 and p.D_measured <= c2.D_measured**2
    rng = np.random.default_rng(1010)
    phi = rng.standard_normal(256) + 1j * rng.standard_normal(256)
    rows = repeated_application(c2, phi / np.linalg.norm(phi), range(1, 8))
    overlap = all(ov >= lb - 1e-10 for _, ov, lb, _ in rows)
    dists = [r[3] for r in rows]
    decreasing = all(b < a for a, b in zip(dists, dists[1:]))
    gapped = [S for _, _, S in area_law_scan("tfim", (2.0,), range(6, 15))]
    spread = max(gapped[4:]) - min(gapped[4:])
    crit = [S for _, _, S in area_law_scan("tfim", (1.0,), range(6, 15))]
    growing = all(b > a for a, b in zip(crit, crit[1:]))
    record(10, f"AGSP: Delta {[round(c.Delta_measured, 4) for c in certs.values()]}, "
               f"gapped spread {spread:.1e} bits",
           {"invariance": inv, "Delta bound": delta, "power rule": power, "overlap bound": overlap,
            "distance decreasing": decreasing, "plateau < 0.05": spread < 0.05, "critical increasing": growing})


# ---------------------------------------------------------------------------
# 11. thermal and simulation


def test_criterion_11_thermal():
    worst = 0.0
    for H in (build_tfim(8, g=2.0), build_tfim(8, g=0.7), build_heisenberg(6, -1.0, -1.0, -1.0)):
        s = dense_spectrum(H)
        beta = 50.0 / s.gap
        worst = max(worst, abs(gibbs_expectation(H, beta) - s.ground_energy))
    H = build_tfim(6, g=1.3)
    M = assemble(H)
    rho = np.eye(M.shape[0]) / M.shape[0]
    # U = exp(iHt) at t = i b/2 turns the maximally mixed state into the Gibbs state at b
    path = max(abs(sim_expectation(H, rho, M, 0.5j * b) - gibbs_expectation(H, b)) for b in np.linspace(0, 5, 11))
    record(11, f"Thermal: beta = 50/gap deviation {worst:.1e}, imaginary-time path deviation {path:.1e}",
           {"Gibbs limit < 1e-6": worst < 1e-6, "sim = Gibbs": path < 1e-9})


if __name__ == "__main__":
    fails = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                fails += 1
    print(f"{11 - fails}/11 criteria passed")
    sys.exit(1 if fails else 0)

"""Self-verification suites run by ``stone-spectra verify``.

Each suite returns a list of :class:`Check` records comparing a computed
value with an independent target.  Random inputs use fixed seeds so the
report is reproducible.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import charfun, resolvents, specfun, stone
from .config import DEFAULT_CONFIG, NumericsConfig
from .resolvents import VACUUM, ObservableSpec, TestFunction

SUITES = ("specfun", "resolvents", "stone", "charfun")


@dataclass
class Check:
    name: str
    target: object
    computed: object
    tolerance: float
    passed: bool


@dataclass
class VerifyReport:
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def overall(self) -> bool:
        return all(c.passed for c in self.checks)

    def table(self) -> str:
        width = max((len(c.name) for c in self.checks), default=10)
        lines = []
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            lines.append(f"{flag}  {c.name:<{width}}  computed={_fmt(c.computed)}  target={_fmt(c.target)}  tol={c.tolerance:.1e}")
        lines.append(f"overall: {'PASS' if self.overall else 'FAIL'} ({len(self.checks)} checks, {self.seconds:.1f} s)")
        return "\n".join(lines)


def _fmt(v):
    if isinstance(v, complex):
        return f"{v.real:.10g}{v.imag:+.10g}j"
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def _close(name, computed, target, tol):
    computed = complex(computed) if np.iscomplexobj(computed) else float(computed)
    target = complex(target) if np.iscomplexobj(target) else float(target)
    ok = bool(abs(computed - target) <= tol)
    return Check(name, target, computed, tol, ok)


def _below(name, value, tol):
    value = float(value)
    return Check(name, 0.0, value, tol, bool(value < tol))


def _flag(name, ok):
    return Check(name, True, bool(ok), 0.0, bool(ok))


# --------------------------------------------------------------------------

def suite_specfun(cfg: NumericsConfig = DEFAULT_CONFIG) -> list:
    ctl = cfg.series
    out = []
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for _ in range(10):
        x = complex(*rng.uniform(-3, 3, 2))
        for n in range(30):
            lhs, rhs = specfun.pochhammer(x, n + 1), specfun.pochhammer(x, n) * (x + n)
            worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    out.append(_below("pochhammer recurrence (relative)", worst, 1e-14))

    ok = True
    for n in range(9):
        for mm in range(9):
            total = sum(specfun.stirling2(n, k) * math.perm(mm, k) for k in range(n + 1))
            ok &= total == mm ** n
    out.append(_flag("stirling2 falling-factorial row sums", ok))

    worst = 0.0
    for t in (-0.5, -0.1, 0.0, 0.1, 0.5):
        for k in range(7):
            closed = math.expm1(2 * t) ** k / math.factorial(k)
            worst = max(worst, abs(specfun.stirling_egf(t, k, ctl) - closed))
    out.append(_below("stirling EGF identity", worst, 1e-10))

    worst = 0.0
    for z in (0.3, -0.7 + 0.2j, 1.0, -1.0, 1j, 0.6 - 0.8j):
        worst = max(worst, abs(specfun.incomplete_beta(z, 1, 1, ctl) - z))
    out.append(_below("incomplete_beta(z,1,1) = z", worst, 1e-14))

    worst = 0.0
    for _ in range(20):
        a = complex(rng.uniform(0.1, 2), rng.uniform(-2, 2))
        b = complex(rng.uniform(-1, 2), rng.uniform(-1, 1))
        z = 0.9 * rng.uniform(0, 1) * np.exp(1j * rng.uniform(-math.pi, math.pi))
        worst = max(worst, specfun.beta_2f1_identity_residual(a, b, z, ctl))
    out.append(_below("2F1/Beta identity, 20 random interior points", worst, 1e-10))

    worst = 0.0
    for t in np.linspace(-5, 5, 21):
        for sign in (-1, 1):
            worst = max(worst, specfun.beta_2f1_identity_residual((1 + sign * 1j * t) / 4, 0.5, -1.0, ctl))
    out.append(_below("2F1/Beta identity at a=(1-+it)/4, b=1/2, z=-1", worst, 1e-10))

    out.append(_close("2F1(1,1;2;1/2) = 2 ln 2", specfun.gauss_2f1(1, 1, 2, 0.5, ctl), 2 * math.log(2), 1e-13))
    out.append(_close("1F1(1;1;1) = e", specfun.kummer_1f1(1, 1, 1, ctl), math.e, 1e-14))

    worst = 0.0
    h = 1e-4
    for a, c, z in KUMMER_ODE_POINTS:
        def w(x):
            return specfun.kummer_1f1(a, c, x, ctl)

        d1 = (w(z + h) - w(z - h)) / (2 * h)
        d2 = (w(z + h) - 2 * w(z) + w(z - h)) / (h * h)
        worst = max(worst, abs(z * d2 + (c - z) * d1 - a * w(z)))
    out.append(_below("1F1 defining ODE (central differences, h=1e-4)", worst, 1e-8))
    return out


# |z| <= 0.25 keeps the h = 1e-4 second-difference rounding (~1e-16 |z w| / h^2) well below 1e-8
KUMMER_ODE_POINTS = (
    (0.25, 0.5, 0.2),
    (-0.75, 1.5, -0.15),
    (0.3 + 0.2j, 0.5, 0.1 + 0.1j),
    (1.0, 2.0, -0.2j),
    (-0.5 + 0.5j, 1.25 - 0.25j, 0.2 - 0.05j),
    (0.5, 0.5, 0.25),
    (0.1j, 0.75, -0.1 + 0.2j),
    (-0.25, 1.0 + 0.5j, 0.05),
    (0.75, 1.5, 0.15j),
    (0.2 - 0.3j, 0.6, -0.22),
)


def suite_resolvents(cfg: NumericsConfig = DEFAULT_CONFIG) -> list:
    out = []
    rng = np.random.default_rng(20240602)
    gauss = TestFunction(lambda x: np.exp(-np.square(x)), 6.1)

    worst = 0.0
    for _ in range(10):
        a = complex(rng.uniform(-3, 3), rng.uniform(-0.9, 2))
        for s in (0.25, 0.5, 1.0, 2.0):
            worst = max(worst, abs(resolvents.resolvent_anticommutator(a, gauss, s, cfg) - resolvents.resolvent_anticommutator(a, gauss, -s, cfg)))
    out.append(_below("XP+PX resolvent evenness", worst, 1e-8))

    worst = 0.0
    h = 1e-4
    for _ in range(5):
        a = complex(rng.uniform(-3, 3), rng.uniform(-0.9, 1.0))
        for s in (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0):
            def g_of(x):
                return resolvents.resolvent_anticommutator(a, VACUUM, x, cfg)

            d = (g_of(s + h) - g_of(s - h)) / (2 * h)
            worst = max(worst, abs(2j * s * d + (a + 1j) * g_of(s) - VACUUM(s)))
    out.append(_below("XP+PX first-order ODE residual", worst, 1e-6))

    worst = 0.0
    h = 1e-3
    for t in (-1.0, 0.0, 0.5, 2.0):
        a = t - 0.1j
        c1, c2 = resolvents.fit_decaying_constants(a, VACUUM, cfg)
        for s in (-1.0, -0.5, 0.0, 0.5, 1.0):
            g3 = resolvents.resolvent_oscillator(a, VACUUM, np.array([s - h, s, s + h]), c1, c2, cfg)
            d2 = (g3[0] - 2 * g3[1] + g3[2]) / (h * h)
            worst = max(worst, abs(d2 - (s * s - 2 * a) * g3[1] - 2 * VACUUM(s)))
    out.append(_below("oscillator Weber ODE residual", worst, 1e-5))

    pair = resolvents.weber_pair(0.3 + 0.1j, cfg)
    worst = float(np.max(np.abs(pair.wronskian(np.array([0.5, 1.0, 2.0])) - 1)))
    out.append(_below("Wronskian(M1, M2) = 1", worst, 1e-8))

    z = 0.0 - 0.1j
    c1, c2 = resolvents.fit_decaying_constants(z, VACUUM, cfg)
    x, w = _line_nodes(VACUUM.decay_radius)
    g = resolvents.resolvent_oscillator(z, VACUUM, x, c1, c2, cfg)
    paired = np.sum(w * VACUUM(x) * g)
    out.append(_close("oscillator pairing vs decay-fitted Weber solve", paired, resolvents.vacuum_resolvent_oscillator(z), 1e-4))

    worst_conj, herglotz = 0.0, True
    specs = (ObservableSpec.anticommutator(), ObservableSpec.oscillator(), ObservableSpec.heisenberg((0.6, 0.8, 0.0)))
    for spec in specs:
        ts = np.linspace(-5, 5, 21)
        for e in (1e-3, 0.1, 1.0):
            lo = resolvents.vacuum_pairing(spec, ts - 1j * e, cfg)
            hi = resolvents.vacuum_pairing(spec, ts + 1j * e, cfg)
            worst_conj = max(worst_conj, float(np.max(np.abs(hi - np.conj(lo)))))
            herglotz &= bool(np.all(lo.imag > 0))
    out.append(_below("pairing conjugate symmetry", worst_conj, 1e-10))
    out.append(_flag("Herglotz sign Im<Phi,R(t-ie)Phi> > 0", herglotz))

    worst = 0.0
    for zz in (1 - 0.1j, -2.5 - 0.7j, 0.3 + 0.05j):
        a_route = resolvents.anticommutator_pairing_quadrature(zz, cfg)
        b_route = resolvents.vacuum_resolvent_anticommutator(zz, cfg, check=False)
        worst = max(worst, abs(a_route - b_route))
    out.append(_below("XP+PX pairing: double quadrature vs 2F1 closed form", worst, cfg.cross_check_tol))

    worst = 0.0
    for n in (3, 5):
        for _ in range(5):
            m = rng.normal(size=(n, n))
            m = m + m.T
            v = rng.normal(size=n)
            spec = ObservableSpec.finite(m, v / np.linalg.norm(v))
            zz = complex(rng.normal(), rng.choice([-1, 1]) * rng.uniform(0.05, 2))
            r = resolvents.finite_resolvent(spec, zz, cfg)
            worst = max(worst, float(np.max(np.abs((zz * np.eye(n) - m) @ r - np.eye(n)))))
    out.append(_below("finite resolvent residual", worst, 1e-12))

    r3 = resolvents.finite_resolvent(ObservableSpec.heisenberg(), 3.0, cfg)
    out.append(_below("Heisenberg R(3;H) closed form", np.max(np.abs(r3 - 0.25 * np.array([[2, 1, 1], [1, 2, 1], [1, 1, 2]]))), 1e-14))

    xphi = TestFunction(lambda x: x * VACUUM(x), VACUUM.decay_radius)
    x2phi = TestFunction(lambda x: x * x * VACUUM(x), 9.2)
    out.append(_below("symmetry of XP+PX on (Phi, x Phi)", resolvents.symmetry_check(ObservableSpec.anticommutator(), VACUUM, xphi, cfg), 1e-8))
    out.append(_below("symmetry of oscillator on (Phi, x^2 Phi)", resolvents.symmetry_check(ObservableSpec.oscillator(), VACUUM, x2phi, cfg), 1e-8))
    return out


def _line_nodes(radius, width=0.25):
    from .quadrature import gauss_legendre_panels

    return gauss_legendre_panels(-radius, radius, int(math.ceil(2 * radius / width)), 20)


def suite_stone(cfg: NumericsConfig = DEFAULT_CONFIG) -> list:
    out = []
    grid = np.linspace(-3, 3, 61)
    for vac in ((1.0, 0.0, 0.0), tuple(np.ones(3) / math.sqrt(3)), (0.6, 0.8, 0.0)):
        spec = ObservableSpec.heisenberg(vac)
        x2 = sum(vac) ** 2
        cdf = stone.stone_cdf(spec, grid, cfg)
        expected = [(loc, m) for loc, m in ((-1.0, 1 - x2 / 3), (2.0, x2 / 3)) if m > 1e-9]
        label = "(" + ",".join(f"{v:.3g}" for v in vac) + ")"
        out.append(_flag(f"Heisenberg {label}: atoms", _atoms_match(cdf.atoms, expected, 1e-3)))
        lam = np.array([-2.0, 0.0, 1.0, 3.0])
        exact = stone.stone_cdf_matrix_exact(spec, lam, 1e-12)
        out.append(_below(f"Heisenberg {label}: CDF vs arctan closed form", np.max(np.abs(cdf(lam) - exact)), 1e-6))

    cdf = stone.stone_cdf(ObservableSpec.oscillator(), np.linspace(-1, 2, 61), cfg)
    out.append(_flag("oscillator: single atom (0.5, 1)", _atoms_match(cdf.atoms, [(0.5, 1.0)], 1e-3)))

    rng = np.random.default_rng(20240603)
    ok_all = True
    for _ in range(5):
        ok_all &= _finite_oracle_case(rng, cfg)
    out.append(_flag("finite matrices: stone_cdf vs eigendecomposition (5 cases)", ok_all))

    lam = np.array([-3.0, -1.0, 0.0, 1.0, 3.0])
    acdf = stone.stone_cdf(ObservableSpec.anticommutator(), np.arange(-30, 30.0001, 0.05), cfg)
    closed = stone.anticommutator_cdf_closed(lam, cfg.series, cfg)
    out.append(_below("XP+PX: Stone CDF vs Beta-form closed CDF", np.max(np.abs(acdf(lam) - closed)), 2e-3))
    out.append(_close("XP+PX closed CDF at 0", stone.anticommutator_cdf_closed(0.0, cfg.series, cfg), 0.5, 1e-8))
    out.append(_close("XP+PX closed CDF at t_cutoff", stone.anticommutator_cdf_closed(cfg.t_cutoff, cfg.series, cfg), 1.0, 1e-6))
    out.append(_close("XP+PX Stone CDF normalisation", acdf.values[-1], 1.0, 1e-3))
    mono = all(np.all(np.diff(c.values) >= -1e-9) for c in (acdf, cdf))
    out.append(_flag("monotone CDFs", mono))
    return out


def _atoms_match(found, expected, tol):
    if len(found) != len(expected):
        return False
    return all(abs(a[0] - b[0]) <= tol and abs(a[1] - b[1]) <= tol for a, b in zip(sorted(found), sorted(expected)))


def random_finite_spec(rng, n=None):
    n = int(rng.integers(2, 7)) if n is None else n
    m = rng.normal(size=(n, n))
    m = 0.5 * (m + m.T)
    v = rng.normal(size=n)
    return ObservableSpec.finite(m, v / np.linalg.norm(v))


def finite_oracle_agrees(spec, cfg, tol=1e-3):
    """Compare stone_cdf with the eigen-oracle away from eigenvalues and on the atoms."""
    vals = np.linalg.eigvalsh(spec.matrix)
    grid = np.linspace(vals[0] - 1.0, vals[-1] + 1.0, 201)
    cdf = stone.stone_cdf(spec, grid, cfg)
    oracle = stone.eig_cdf_oracle(spec, cdf.grid)
    far = np.min(np.abs(cdf.grid[:, None] - vals[None, :]), axis=1) > 0.05
    ok = bool(np.all(np.abs(cdf.values[far] - oracle.values[far]) <= tol))
    heavy = [(x, m) for x, m in oracle.atoms if m > cfg.atom_jump_tol]
    for x, m in heavy:
        near = [a for a in cdf.atoms if abs(a[0] - x) <= tol]
        ok &= len(near) == 1 and abs(near[0][1] - m) <= tol
    return ok


def _finite_oracle_case(rng, cfg):
    return finite_oracle_agrees(random_finite_spec(rng), cfg)


def suite_charfun(cfg: NumericsConfig = DEFAULT_CONFIG) -> list:
    out = []
    ts = np.array([-2.0, -1.0, -0.5, 0.5, 1.0, 2.0])
    ref = charfun.cf_anticommutator_reference(ts)
    gauss = np.array([charfun.cf_anticommutator_gaussian_route(t, cfg) for t in ts])
    series = np.array([charfun.cf_anticommutator_series(t, cfg.series) for t in ts])
    out.append(_below("XP+PX CF: Gaussian route vs sqrt(sech 2t)", np.max(np.abs(gauss - ref)), 1e-6))
    out.append(_below("XP+PX CF: series route vs sqrt(sech 2t)", np.max(np.abs(series - ref)), 1e-8))
    out.append(_below("XP+PX CF: Gaussian vs series route", np.max(np.abs(gauss - series)), 1e-6))

    acdf = stone.stone_cdf(ObservableSpec.anticommutator(), np.arange(-30, 30.0001, 0.05), cfg)
    phi = charfun.cf_from_measure(charfun.measure_from_cdf(acdf), ts, cfg)
    out.append(_below("XP+PX CF: Stone route vs sqrt(sech 2t)", phi.max_deviation(charfun.cf_anticommutator_reference), 2e-3))
    out.append(_below("XP+PX CF: Hermitian symmetry", np.max(np.abs(phi.values[::-1] - np.conj(phi.values))), 1e-10))

    ocdf = stone.stone_cdf(ObservableSpec.oscillator(), np.linspace(-1, 2, 61), cfg)
    tt = np.linspace(-4, 4, 41)
    ophi = charfun.cf_from_measure(charfun.measure_from_cdf(ocdf), tt, cfg)
    out.append(_below("oscillator CF vs e^{it/2}", ophi.max_deviation(lambda t: np.exp(0.5j * t)), 1e-3))

    rng = np.random.default_rng(20240604)
    worst = 0.0
    tt = np.linspace(-6, 6, 49)
    for _ in range(5):
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        x2 = float(np.sum(v)) ** 2
        hcdf = stone.stone_cdf(ObservableSpec.heisenberg(v), np.linspace(-3, 3, 61), cfg)
        hphi = charfun.cf_from_measure(charfun.measure_from_cdf(hcdf), tt, cfg)
        worst = max(worst, hphi.max_deviation(lambda t, x2=x2: (1 - x2 / 3) * np.exp(-1j * t) + x2 / 3 * np.exp(2j * t)))
    out.append(_below("Heisenberg CF vs Bernoulli closed form (5 vacua)", worst, 1e-6))

    worst = 0.0
    for a, b, g in GAUSSIAN_TRIPLES:
        closed = charfun.gaussian_double_integral(a, b, g, cfg, check=False)
        worst = max(worst, abs(closed - charfun.gaussian_double_integral_quadrature(a, b, g)))
    out.append(_below("Gaussian double-integral formula vs quadrature (10 triples)", worst, 1e-7))

    m = charfun.anticommutator_measure(cfg=cfg)
    out.append(_close("XP+PX density total mass", m.total_mass, 1.0, 1e-6))
    lam = np.linspace(0, 30, 61)
    out.append(_below("XP+PX density evenness", np.max(np.abs(charfun.anticommutator_density(lam) - charfun.anticommutator_density(-lam))), 1e-12))
    ft = charfun.cf_from_measure(m, [1.0], cfg).values[0]
    out.append(_close("XP+PX density Fourier transform at t=1", ft, math.sqrt(1 / math.cosh(2.0)), 1e-5))
    return out


GAUSSIAN_TRIPLES = (
    (-0.5, -0.5, 0.0),
    (-0.5, -0.5, 1.0),
    (-0.5, -0.5, math.exp(1.0)),
    (-0.5, -0.5, math.exp(2.0)),
    (-0.5, -0.5, math.exp(-3.0)),
    (-0.5, -0.5, math.exp(4.0)),
    (-1.0, -0.25, 0.7),
    (-0.3 + 0.4j, -0.8, 0.5),
    (-1.0 + 1.0j, -0.5 - 0.2j, 0.3 + 0.1j),
    (-2.0, -0.6 + 0.3j, -1.1),
)


_SUITE_FUNCS = {
    "specfun": suite_specfun,
    "resolvents": suite_resolvents,
    "stone": suite_stone,
    "charfun": suite_charfun,
}


def run_verify(suite: str = "all", cfg: NumericsConfig = DEFAULT_CONFIG) -> VerifyReport:
    names = SUITES if suite == "all" else (suite,)
    if any(n not in _SUITE_FUNCS for n in names):
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES + ('all',))}")
    start = time.perf_counter()
    report = VerifyReport()
    for n in names:
        for c in _SUITE_FUNCS[n](cfg):
            c.name = f"{n}: {c.name}"
            report.checks.append(c)
    report.seconds = time.perf_counter() - start
    return report

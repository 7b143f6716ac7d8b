"""Named verification suites run by the CLI."""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from functools import cached_property

import numpy as np

from . import algebra, control
from .algebra import Kind
from .config import ExperimentConfig
from .control import PowerType
from .errors import ConfigError, Divergent, InvalidRegime, ScalingHypothesisViolated, TailNotCertifiable
from .homstab import (LinearityMode, choose_M, hom_residual, idempotent_generators, recover_hom,
                      unimodular_three_split, verify_complex_linearity, verify_generated_hom,
                      verify_hom_defect, verify_scaling)
from .hyers import LimitMap, hyers_limit, verify_additivity, verify_stability_bound, verify_uniqueness
from .perturb import (FiveSlotPower, LatticeMaskedProbe, TwoSlotPower, calibrate_epsilon, calibration_tuples,
                      make_probe)
from .report import Report, StabilityRow
from .sampling import sample_points, sample_tuples

log = logging.getLogger(__name__)

ASSOC_TOL = 1e-10
SUBMULT_SLACK = 1e-12
BRIDGE_TOL = 1e-14


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("HYERSLAB_THREADS", "1")))
    except ValueError:
        return 1


def pmap(fn, items):
    """Order-preserving map, parallel when ``HYERSLAB_THREADS`` > 1."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


class Experiment:
    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.ctx = cfg.context()
        self.params = cfg.jensen_params()
        self.core = cfg.core()
        self.pert = cfg.perturbation()
        self.probe = make_probe(self.core, self.pert, self.ctx, "probe")
        self.stability_rows: list[StabilityRow] = []
        self.meta: dict = {}

    # -- controls ----------------------------------------------------------

    def _calibrated(self, probe, slots: int, seed_offset: int = 0):
        p = float(self.cfg.control.get("p", 0.5))
        budget = int(self.cfg.control.get("budget", 2000))
        shape = TwoSlotPower(p) if slots == 2 else FiveSlotPower(p)
        cal = calibrate_epsilon(probe, self.params, self.ctx, shape, budget, self.cfg.seed + seed_offset,
                                self.cfg.residual_sign)
        self.meta[f"calibration_{slots}slot_{probe.label}"] = {
            "eps": cal.eps, "sup_ratio": cal.sup_ratio, "safety_factor": cal.safety_factor,
            "samples_used": cal.samples_used, "samples_excluded": cal.samples_excluded}
        return cal.control()

    def control_for(self, probe, slots: int):
        phi = self.cfg.fixed_control(arity=slots)
        if phi is None:
            phi = self._calibrated(probe, slots)
        try:
            control.geometric_ratio(phi, self.params.r / self.params.k, self.params.direction)
        except (Divergent, TailNotCertifiable) as exc:
            raise ConfigError(f"control is outside the convergent regime: {exc}") from exc
        return phi

    @cached_property
    def phi2(self):
        return self.control_for(self.probe, 2)

    @cached_property
    def phi5(self):
        return self.control_for(self.probe, 5)

    def samples(self, stream: int = 1, count: int | None = None):
        return sample_points(self.ctx, count or self.cfg.samples, self.cfg.seed, stream)

    # -- suites ------------------------------------------------------------

    def run(self, suite: str) -> Report:
        order = ["algebra", "series", "jensen", "homstab", "linearity", "generated"]
        names = order if suite == "full" else [suite]
        report = Report(suite)
        for name in names:
            report.extend(getattr(self, f"suite_{name}")())
        report.meta.update(self.meta)
        return report

    def suite_algebra(self) -> Report:
        ctx, n = self.ctx, self.cfg.samples
        rep = Report("algebra")
        for sid, (a, b, c) in enumerate(sample_tuples(ctx, n, 3, self.cfg.seed, 31)):
            na, nb, nc = ctx.norm(a), ctx.norm(b), ctx.norm(c)
            abc = algebra.ternary_product(ctx, a, b, c)
            rep.add("submultiplicativity", sid, ctx.norm(abc), na * nb * nc * (1 + SUBMULT_SLACK))
            if ctx.kind is Kind.POLY:
                even = int(np.count_nonzero(abc.degrees % 2 == 0))
                rep.add("poly_closure_odd_degrees", sid, even, 0)
        for sid, tup in enumerate(sample_tuples(ctx, n, 5, self.cfg.seed, 32)):
            scale = math.prod(ctx.norm(e) for e in tup)
            rep.add("associativity", sid, algebra.check_ternary_associativity(ctx, *tup), ASSOC_TOL * scale)
        for sid, (a, a2, b, c) in enumerate(sample_tuples(ctx, n, 4, self.cfg.seed, 33)):
            na, na2, nb, nc = (ctx.norm(e) for e in (a, a2, b, c))
            bound = ASSOC_TOL * (na + na2) * nb * nc
            t = ctx.triple
            rep.add("slot_linearity", 3 * sid, ctx.norm(t(a + a2, b, c) - t(a, b, c) - t(a2, b, c)), bound)
            rep.add("slot_linearity", 3 * sid + 1, ctx.norm(t(b, a + a2, c) - t(b, a, c) - t(b, a2, c)), bound)
            rep.add("slot_linearity", 3 * sid + 2, ctx.norm(t(b, c, a + a2) - t(b, c, a) - t(b, c, a2)), bound)
        if ctx.kind is Kind.MATRIX:
            e = ctx.identity()
            for sid, (a, b, c) in enumerate(sample_tuples(ctx, n, 3, self.cfg.seed, 34)):
                d = algebra.check_bridge(ctx, e, a, b, c)
                scale = ctx.norm(a) * ctx.norm(b) * ctx.norm(c)
                rep.add("bridge_associativity", sid, d["associativity"], ASSOC_TOL * scale)
                rep.add("bridge_right_unit", sid, d["right_unit"], BRIDGE_TOL * ctx.norm(a))
                rep.add("bridge_left_unit", sid, d["left_unit"], BRIDGE_TOL * ctx.norm(a))
                prod = algebra.binary_from_identity(ctx, e, a, b)
                plain = a.entries @ b.entries
                rep.add("bridge_matches_product", sid, float(np.max(np.abs(prod.entries - plain))),
                        BRIDGE_TOL * float(np.max(np.abs(plain))))
        return rep

    def suite_series(self) -> Report:
        ctx, params = self.ctx, self.params
        phi = self.phi2
        rep = Report("series")
        r, k, direction = params.r, params.k, params.direction
        for sid, x in enumerate(self.samples(41)):
            nx = ctx.norm(x)
            tilde = control.phi_tilde(phi, r, k, [nx, nx], direction=direction)
            coarse = control.phi_tilde(phi, r, k, [nx, nx], tol=1e-6, direction=direction)
            rep.add("series_certified", sid, tilde.truncation_tail, 1e-9 * max(tilde.value, 1.0),
                    passed=tilde.certified and tilde.truncation_tail <= 1e-9 * max(tilde.value, 1.0))
            rep.add("series_monotone_truncation", sid, tilde.value, coarse.upper * (1 + 1e-14) + 1e-300)
            app = control.derivation_bound(phi, r, k, nx, direction=direction, slot=params.slot)
            rep.add("derivation_series_certified", sid, app.truncation_tail, 1e-9 * max(app.value, 1.0),
                    passed=app.certified)
            if isinstance(phi, PowerType) and phi.arity == 2:
                try:
                    closed = control.power_bound_closed_form(phi.eps, phi.p, r, k, nx, direction)
                except InvalidRegime:
                    continue
                rep.add("closed_form_agreement", sid, abs(closed - tilde.value), 1e-10 * max(closed, 1e-300))
        return rep

    def _limit_map(self, probe, phi, tol):
        return LimitMap(probe, self.params, self.ctx, phi, tol, self.cfg.n_cap)

    def suite_jensen(self) -> Report:
        ctx, params, tol = self.ctx, self.params, self.cfg.tol
        phi = self.phi2
        rep = Report("jensen")
        xs = self.samples(51)
        parts = pmap(lambda x: hyers_limit(self.probe, params, ctx, phi, x, tol, self.cfg.n_cap), xs)
        res = parts[0]
        for sid, part in enumerate(parts):
            res.samples[sid] = part.samples[0]
            res.limit_at[sid] = part.limit_at[0]
            res.n_used[sid] = part.n_used[0]
            res.tail_bound[sid] = part.tail_bound[0]
            res.certified = res.certified and part.certified
        for sid, x in enumerate(xs):
            rep.add("hyers_certified", sid, res.tail_bound[sid], tol, passed=res.certified)
            rep.add("core_recovery", sid, ctx.norm(res.limit_at[sid] - self.core(x)), tol * (1 + ctx.norm(x)))
        if res.certified:
            stab, rows = verify_stability_bound(self.probe, res, phi, params, ctx)
            rep.extend(stab)
            self.stability_rows = rows
        T = self._limit_map(self.probe, phi, tol)
        pairs = list(zip(xs, xs[1:] + xs[:1]))
        rep.extend(verify_additivity(T, ctx, pairs, 3 * tol))
        rho = float(params.ratio)
        rep.extend(verify_scaling(T, params, ctx, xs, (1 + rho) * tol))
        other = make_probe(self.core, self.cfg.perturbation(seed_offset=1), ctx, "probe_alt")
        phi_alt = self.control_for(other, 2)
        T_alt = self._limit_map(other, phi_alt, tol)
        rep.extend(verify_uniqueness(T, T_alt, phi, params, ctx, xs[: min(len(xs), 10)], 20, slack=2 * tol))
        return rep

    def suite_homstab(self) -> Report:
        ctx, params, tol = self.ctx, self.params, self.cfg.tol
        phi5 = self.phi5
        rep = Report("homstab")
        n = self.cfg.samples
        rng_tuples = calibration_tuples(ctx, 5, max(n, 10), self.cfg.seed + 7919)
        for sid, (mu, args) in enumerate(rng_tuples):
            res = hom_residual(self.probe, params, ctx, mu, *args, residual_sign=self.cfg.residual_sign)
            bound = control.phi_eval(phi5, args, ctx)
            rep.add("residual_dominance", sid, res, bound * (1 + 1e-12) + 1e-300, mu=mu)
        xs = self.samples(61)
        rec = recover_hom(self.probe, params, ctx, phi5, xs, tol / 10, self.cfg.n_cap)
        for sid, x in enumerate(xs):
            rep.add("recover_hom_certified", sid, rec.tail_bound[sid], tol / 10, passed=rec.certified)
            dev = ctx.norm(self.probe(x) - rec.limit_at[sid])
            rep.add("ft_bound", sid, dev, rec.bound_ft[sid] + 1e-9)
            if self.cfg.core_is_hom():
                rep.add("hom_recovery", sid, ctx.norm(rec.limit_at[sid] - self.core(x)), tol * (1 + ctx.norm(x)))
        T = self._limit_map(self.probe, phi5, tol / 10)
        triples = sample_tuples(ctx, n, 3, self.cfg.seed, 62, lo=0.1, hi=2.0)
        rho = float(params.ratio)
        try:
            rep.extend(verify_hom_defect(T, ctx, triples, params, phi5, self.cfg.n_probe, tol,
                                         scaling_tol=(1 + rho) * tol / 10))
        except ScalingHypothesisViolated as exc:
            self.meta["hom_defect"] = f"skipped: {exc}"
            rep.add("scaling_hypothesis", 0, math.inf, (1 + rho) * tol / 10, passed=False)
        return rep

    def suite_linearity(self) -> Report:
        ctx, tol = self.ctx, self.cfg.tol
        rep = Report("linearity")
        for sid, lam in enumerate(self.cfg.scalar_grid()):
            M = choose_M(lam)
            trip = unimodular_three_split(lam, M)
            rep.add("split_modulus", sid, max(abs(abs(m) - 1) for m in trip), 1e-12, mu=lam)
            rep.add("split_sum", sid, abs(trip.total - 3 * lam / M), 1e-12, mu=lam)
        T = self._limit_map(self.probe, self.phi2, tol / 10)
        xs = self.samples(71, min(self.cfg.samples, 10))
        grid = self.cfg.scalar_grid()
        rep.extend(verify_complex_linearity(T, ctx, xs, grid, LinearityMode.FULL_CIRCLE, tol))
        rep.extend(verify_complex_linearity(T, ctx, xs, grid, LinearityMode.ONE_AND_I, tol))
        return rep

    def suite_generated(self) -> Report:
        ctx, params, tol = self.ctx, self.params, self.cfg.tol
        rep = Report("generated")
        if ctx.kind is not Kind.MATRIX or not self.cfg.core_is_hom() or params.direction.value != "forward":
            self.meta["generated"] = "skipped: needs a matrix algebra, a homomorphism core and forward direction"
            return rep
        S = idempotent_generators(ctx)
        zs = self.samples(81, min(self.cfg.samples, 4))
        masked = list(S) + list(zs) + [ctx.triple(a, b, z) for a in S for b in S for z in zs]
        f = LatticeMaskedProbe(self.core, self.pert, ctx, masked)
        phi = self.control_for(f, 2)
        T = self._limit_map(f, phi, tol / 10)
        xy = sample_tuples(ctx, len(zs), 2, self.cfg.seed, 82)
        rep.extend(verify_generated_hom(f, T, ctx, S, zs, params, 1, 3, tol, samples_xy=xy))
        return rep

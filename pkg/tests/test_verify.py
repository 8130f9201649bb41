"""Tests for the identity verifiers, the sampler, and their reports."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellbailey.bailey import chain_step, flatten, pair_residual, seed_pair
from ellbailey.constraints import ConstraintSet
from ellbailey.ellgamma import BaseParams, elliptic_gamma
from ellbailey.errors import (ConstraintViolation, DomainError,
                              SamplingExhausted)
from ellbailey.expr import Assignment
from ellbailey.quadrature import QuadratureConfig
from ellbailey.verify import (VerificationReport, beta_integral_sides,
                              id_seq_sides, ident1_sides, identfin_sides,
                              identity_sides, net_factor_counts,
                              sample_params, transformation_consistency_gap,
                              transformation_sides, verify_beta_integral,
                              verify_id_seq, verify_ident1, verify_identfin,
                              verify_identity, verify_transformation)

BASE = BaseParams(q=0.3, p=0.2)

BETA_TS = (0.7, 0.6, 0.5, 0.6, 0.7)


def beta_assignment(ts):
    return Assignment({f"t{m}": ts[m] for m in range(5)})


def closed_form_beta(ts, base):
    """Independent evaluation of the product side, term by term."""
    A = 1.0 + 0.0j
    for v in ts:
        A *= v
    val = 2.0 / (base.q_poch * base.p_poch)
    for i in range(5):
        for j in range(i + 1, 5):
            val *= elliptic_gamma(ts[i] * ts[j], base)
        val /= elliptic_gamma(A / ts[i], base)
    return val


class TestBetaIntegral:
    def test_real_point_matches_closed_form(self):
        rep = verify_beta_integral(beta_assignment(BETA_TS), BASE)
        assert rep.converged
        assert rep.rel_err < 1e-8
        closed = closed_form_beta(BETA_TS, BASE)
        assert rep.rhs == pytest.approx(closed, rel=1e-12)
        assert rep.lhs == pytest.approx(closed, rel=1e-8)
        assert rep.rhs == pytest.approx(14093.4546462141, rel=1e-10)

    def test_complex_point(self):
        ts = (0.7, 0.65 * np.exp(0.3j), 0.6 * np.exp(-0.4j), 0.55,
              0.5 * np.exp(1.1j))
        rep = verify_beta_integral(beta_assignment(ts), BASE)
        assert rep.converged
        assert rep.rel_err < 1e-8
        frozen = 263.84997589846154 - 403.01335463963585j
        assert rep.rhs == pytest.approx(frozen, rel=1e-10)

    def test_parameter_permutation_invariance(self):
        rep = verify_beta_integral(beta_assignment(BETA_TS), BASE)
        for perm in ((4, 3, 2, 1, 0), (2, 0, 4, 1, 3)):
            other = verify_beta_integral(
                beta_assignment([BETA_TS[i] for i in perm]), BASE)
            assert other.lhs == pytest.approx(rep.lhs, rel=1e-12)
            assert other.rhs == pytest.approx(rep.rhs, rel=1e-12)

    def test_constraint_violation(self):
        # all t_m = 0.5 gives |A| = 0.03125 below |pq| = 0.06
        with pytest.raises(ConstraintViolation):
            verify_beta_integral(beta_assignment((0.5,) * 5), BASE)

    def test_report_json_round_trip(self):
        rep = verify_beta_integral(beta_assignment(BETA_TS), BASE)
        obj = rep.to_json()
        assert sorted(obj) == ["abs_err", "assignment", "converged",
                               "identity_id", "lhs", "nodes_used", "rel_err",
                               "rhs", "runtime_ms"]
        assert obj["identity_id"] == "beta"
        assert obj["lhs"] == [rep.lhs.real, rep.lhs.imag]
        assert obj["rhs"] == [rep.rhs.real, rep.rhs.imag]
        back = VerificationReport.from_json(obj)
        assert back == rep


class TestTransformation:
    def test_sampled_assignment_closes(self):
        sides = transformation_sides()
        a = sample_params(sides.constraints, 7, base=BASE)
        rep = verify_transformation(a, BASE)
        assert rep.converged
        assert rep.rel_err < 1e-8
        assert len(rep.nodes_used) == 2

    def test_triple_exchange_swaps_sides(self):
        sides = transformation_sides()
        a = sample_params(sides.constraints, 7, base=BASE)
        swapped = dict(a.params)
        for j in "123":
            swapped[f"t{j}"], swapped[f"s{j}"] = (swapped[f"s{j}"],
                                                  swapped[f"t{j}"])
        rep = verify_transformation(a, BASE)
        other = verify_transformation(Assignment(swapped), BASE)
        assert other.lhs == pytest.approx(rep.rhs, rel=1e-13)
        assert other.rhs == pytest.approx(rep.lhs, rel=1e-13)
        assert other.rel_err == pytest.approx(rep.rel_err, rel=1e-6, abs=1e-13)

    def test_chain_special_case(self):
        """With the second triple on a common modulus circle, (u, s w,
        s / w), the transformation coincides with the depth-one chain
        identity; all three statements must agree."""
        a = sample_params(id_seq_sides(1).constraints, 3, base=BASE,
                          circle_vars=("w",))
        w = complex(a.vars["w"])
        mapped = Assignment({
            "t": a.params["t"], "t1": a.params["t0"], "t2": a.params["t1"],
            "t3": a.params["t2"], "s1": a.params["u1"],
            "s2": a.params["s1"] * w, "s3": a.params["s1"] / w,
        })
        rep = verify_transformation(mapped, BASE)
        assert rep.converged
        assert rep.rel_err < 1e-8
        pair = chain_step(seed_pair(), "s1", "u1")
        residual = pair_residual(pair, a, BASE,
                                 QuadratureConfig(target=1e-10, n_max=1024))
        assert abs(residual) / abs(rep.lhs) < 1e-6
        assert transformation_consistency_gap(a, BASE) < 1e-8


class TestIdSeq:
    def test_depth_one_closes_and_matches_transformation(self):
        a = sample_params(id_seq_sides(1).constraints, 3, base=BASE,
                          circle_vars=("w",))
        rep = verify_id_seq(1, a, BASE)
        assert rep.converged
        assert rep.rel_err < 1e-8
        assert transformation_consistency_gap(a, BASE) < 1e-8

    def test_depth_two_closes_under_default_budget(self):
        a = sample_params(id_seq_sides(2).constraints, 5, base=BASE,
                          circle_vars=("w",))
        rep = verify_id_seq(2, a, BASE)
        assert rep.converged
        assert rep.rel_err < 1e-8

    def test_depth_two_capped_budget(self):
        a = sample_params(id_seq_sides(2).constraints, 1, base=BASE,
                          circle_vars=("w",))
        rep = verify_id_seq(2, a, BASE, QuadratureConfig(target=1e-8,
                                                         n_max=64))
        assert not rep.converged
        assert rep.rel_err < 1e-5

    def test_unit_modulus_step_parameter_rejected(self):
        a = sample_params(id_seq_sides(1).constraints, 3, base=BASE,
                          circle_vars=("w",))
        bad = Assignment(dict(a.params, s1=1.0), a.vars)
        with pytest.raises(ConstraintViolation):
            verify_id_seq(1, bad, BASE)

    def test_depth_zero_rejected(self):
        with pytest.raises(DomainError):
            id_seq_sides(0)
        with pytest.raises(DomainError):
            identfin_sides(0)


class TestIdent1:
    def test_sampled_assignment_closes(self):
        a = sample_params(ident1_sides().constraints, 11, base=BASE,
                          circle_vars=("w",))
        rep = verify_ident1(a, BASE)
        assert rep.converged
        assert rep.rel_err < 1e-6

    def test_budgeted_grid_meets_tolerance(self):
        a = sample_params(ident1_sides().constraints, 11, base=BASE,
                          circle_vars=("w",))
        rep = verify_ident1(a, BASE, QuadratureConfig(target=1e-6, n_max=128))
        assert rep.rel_err < 1e-6

    def test_external_point_inversion_invariance(self):
        sides = ident1_sides()
        for expr in (sides.lhs, sides.rhs):
            counts: dict = {}
            flipped: dict = {}
            for f in flatten(expr).factors:
                key = (f.coeff, f.vars, f.loc)
                inv = (f.coeff, tuple((n, -e if n == "w" else e)
                                      for n, e in f.vars), f.loc)
                counts[key] = counts.get(key, 0) + 1
                flipped[inv] = flipped.get(inv, 0) + 1
            assert counts == flipped
        a = sample_params(sides.constraints, 11, base=BASE,
                          circle_vars=("w",))
        inverted = Assignment(a.params, {"w": 1 / complex(a.vars["w"])})
        rep = verify_ident1(a, BASE)
        other = verify_ident1(inverted, BASE)
        assert other.lhs == pytest.approx(rep.lhs, rel=1e-12)
        assert other.rhs == pytest.approx(rep.rhs, rel=1e-12)


class TestIdentfin:
    def test_depth_one_reduces_structurally(self):
        """After cancelling matching numerator and denominator factors,
        depth one has exactly the two-integral equality's trees."""
        a_sides = ident1_sides()
        b_sides = identfin_sides(1)
        for side in ("lhs", "rhs"):
            ea, eb = getattr(a_sides, side), getattr(b_sides, side)
            assert net_factor_counts(ea) == net_factor_counts(eb)
            fa, fb = flatten(ea), flatten(eb)
            assert fa.kappa_pow == fb.kappa_pow
            assert sorted(fa.int_vars) == sorted(fb.int_vars)
            assert fa.mono == fb.mono

    def test_depth_one_matches_numerically(self):
        a = sample_params(identfin_sides(1).constraints, 13, base=BASE,
                          circle_vars=("w",))
        rep = verify_identfin(1, a, BASE)
        assert rep.converged
        assert rep.rel_err < 1e-6
        other = verify_ident1(a, BASE)
        assert rep.lhs == pytest.approx(other.lhs, rel=1e-10)
        assert rep.rhs == pytest.approx(other.rhs, rel=1e-10)

    def test_depth_two_honest_budget_flag(self):
        a = sample_params(identfin_sides(2).constraints, 9,
                          moduli_range=(0.75, 0.8), base=BASE,
                          circle_vars=("w",))
        capped = verify_identfin(2, a, BASE,
                                 QuadratureConfig(target=1e-3, n_max=32))
        assert not capped.converged
        full = verify_identfin(2, a, BASE)
        assert full.converged
        assert full.rel_err < 1e-3


class TestSampler:
    def test_seeded_sample_satisfies_constraints(self):
        cs = beta_integral_sides().constraints
        a = sample_params(cs, 1, (0.5, 0.8), base=BASE)
        A = 1.0 + 0.0j
        for m in range(5):
            v = a.params[f"t{m}"]
            assert 0.5 <= abs(v) <= 0.8
            A *= v
        assert abs(BASE.pq) < abs(A)
        assert cs.satisfied(a, BASE, with_margin=True)

    def test_determinism(self):
        cs = transformation_sides().constraints
        first = sample_params(cs, 42, base=BASE, circle_vars=("w",))
        second = sample_params(cs, 42, base=BASE, circle_vars=("w",))
        assert first.params == second.params
        assert first.vars == second.vars
        third = sample_params(cs, 43, base=BASE, circle_vars=("w",))
        assert third.params != first.params

    def test_empty_set_accepts_first_draw(self):
        a = sample_params(ConstraintSet(), 0, base=BASE,
                          extra_names=("a", "b"), max_tries=1)
        assert sorted(a.params) == ["a", "b"]
        assert all(0.4 <= abs(v) <= 0.8 for v in a.params.values())

    def test_infeasible_range_exhausts(self):
        cs = beta_integral_sides().constraints
        # |A| <= 0.42^5 is below |pq|/0.7, so every draw is rejected
        with pytest.raises(SamplingExhausted):
            sample_params(cs, 1, (0.41, 0.42), base=BASE, max_tries=50)

    def test_range_validation(self):
        cs = ConstraintSet()
        with pytest.raises(DomainError):
            sample_params(cs, 0, (0.0, 0.5), base=BASE, extra_names=("a",))
        with pytest.raises(DomainError):
            sample_params(cs, 0, (0.5, 1.0), base=BASE, extra_names=("a",))

    def test_circle_vars_have_unit_modulus(self):
        a = sample_params(ident1_sides().constraints, 2, base=BASE,
                          circle_vars=("w",))
        assert abs(abs(complex(a.vars["w"])) - 1.0) < 1e-12

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**20))
    def test_samples_always_satisfy_margins(self, seed):
        cs = beta_integral_sides().constraints
        a = sample_params(cs, seed, base=BASE)
        assert cs.satisfied(a, BASE, with_margin=True)


class TestDispatchAndReports:
    def test_identity_sides_dispatcher(self):
        assert identity_sides("beta").identity_id == "beta"
        assert identity_sides("transformation").identity_id == "transformation"
        assert identity_sides("id-seq").identity_id == "id-seq:1"
        assert identity_sides("id-seq:2").identity_id == "id-seq:2"
        assert identity_sides("ident1").identity_id == "ident1"
        deep = identity_sides("identfin:2")
        assert "s3" in deep.constraints.param_names()
        for bad in ("id-seq:x", "identfin:0", "unknown", "beta:1"):
            with pytest.raises(DomainError):
                identity_sides(bad)

    def test_verify_identity_dispatch(self):
        a = beta_assignment(BETA_TS)
        rep = verify_identity("beta", a, BASE)
        direct = verify_beta_integral(a, BASE)
        assert rep.identity_id == "beta"
        assert rep.lhs == direct.lhs
        assert rep.rhs == direct.rhs

    def test_reports_deterministic(self):
        a = sample_params(transformation_sides().constraints, 7, base=BASE)
        first = verify_transformation(a, BASE)
        second = verify_transformation(a, BASE)
        assert first.lhs == second.lhs
        assert first.rhs == second.rhs
        assert first.rel_err == second.rel_err
        assert first.nodes_used == second.nodes_used

    def test_unbound_external_point_rejected(self):
        a = sample_params(ident1_sides().constraints, 11, base=BASE,
                          circle_vars=("w",))
        with pytest.raises(ConstraintViolation):
            verify_ident1(Assignment(a.params), BASE)
        off = Assignment(a.params, {"w": 0.9})
        with pytest.raises(ConstraintViolation):
            verify_ident1(off, BASE)

    def test_rel_err_decreases_as_budget_doubles(self):
        runs = [
            ("beta", beta_integral_sides(), 1,
             lambda a, cfg: verify_beta_integral(a, BASE, cfg), (16, 32, 64)),
            ("transformation", transformation_sides(), 7,
             lambda a, cfg: verify_transformation(a, BASE, cfg),
             (16, 32, 64)),
            ("id-seq:1", id_seq_sides(1), 3,
             lambda a, cfg: verify_id_seq(1, a, BASE, cfg), (16, 32, 64)),
            ("ident1", ident1_sides(), 11,
             lambda a, cfg: verify_ident1(a, BASE, cfg), (32, 64, 128)),
        ]
        for _, sides, seed, runner, ladder in runs:
            a = sample_params(sides.constraints, seed, base=BASE,
                              circle_vars=sides.circle_vars)
            rels = []
            for n in ladder:
                rep = runner(a, QuadratureConfig(target=1e-10, n_max=n))
                assert not rep.converged
                rels.append(rep.rel_err)
            assert rels[0] > rels[1] > rels[2]

    def test_sides_are_distinct_trees(self):
        all_sides = [beta_integral_sides(), transformation_sides(),
                     id_seq_sides(1), id_seq_sides(2), ident1_sides(),
                     identfin_sides(1), identfin_sides(2)]
        for sides in all_sides:
            assert sides.lhs != sides.rhs
        assert beta_integral_sides().dims() == (1, 0)
        assert transformation_sides().dims() == (1, 1)
        assert id_seq_sides(2).dims() == (2, 1)
        assert ident1_sides().dims() == (1, 2)
        assert identfin_sides(2).dims() == (1, 3)

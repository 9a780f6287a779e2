"""Checker: agreement with the producer on honest certificates, and a
fault-injection suite verifying that corrupting a stored witness flips its
check (and only the checks that genuinely depend on it)."""

from dataclasses import replace

import numpy as np
import pytest

from hellycert.checker import CheckReport, check_certificate
from hellycert.errors import MalformedCertificate
from hellycert.generators import gen_affine_warp, gen_cube, gen_tangent_random
from hellycert.pipeline import select

ALL_CHECKS = {
    "instance_map",
    "decomposition",
    "selection_window",
    "simplex_floor",
    "ray_depth",
    "contraction",
    "hull_chain",
    "polar_cover",
    "ratio_volumes",
    "ratio_bound",
    "subfamily_size",
    "subfamily_membership",
}


@pytest.fixture(scope="module")
def cube_cert():
    return select(gen_cube(2))


@pytest.fixture(scope="module")
def random_cert():
    return select(gen_tangent_random(3, 9, seed=7))


class TestHonestCertificates:
    def test_cube_all_pass(self, cube_cert):
        rep = check_certificate(cube_cert)
        assert isinstance(rep, CheckReport)
        assert rep.passed
        assert {item.name for item in rep.items} == ALL_CHECKS
        assert rep.failures() == ()

    def test_report_lookup(self, cube_cert):
        rep = check_certificate(cube_cert)
        assert rep["ray_depth"].passed
        with pytest.raises(KeyError):
            rep["no_such_check"]

    @pytest.mark.parametrize("d", [2, 3])
    def test_random_and_warped_instances(self, d):
        for seed in range(6):
            poly = gen_tangent_random(d, 3 * d, seed=seed)
            assert check_certificate(select(poly)).passed
            warped, _, _ = gen_affine_warp(poly, seed=seed + 100)
            assert check_certificate(select(warped)).passed

    def test_recomputed_ratio_matches(self, random_cert):
        rep = check_certificate(random_cert)
        assert rep.ratio == pytest.approx(random_cert.ratio, rel=1e-9)
        assert rep.bound == random_cert.bound

    def test_sampled_selector_gates_window_checks(self):
        cert = select(gen_tangent_random(2, 8, seed=3), selector="pivovarov", seed=11)
        rep = check_certificate(cert)
        assert rep.passed
        gated = {i.name for i in rep.items if not i.applicable}
        assert gated == {"selection_window", "simplex_floor", "ratio_bound"}

    def test_scale_parameter_loosens(self, random_cert):
        strict = check_certificate(random_cert, scale=1.0)
        loose = check_certificate(random_cert, scale=100.0)
        assert loose.passed
        assert strict.scale == 1.0 and loose.scale == 100.0

    def test_rejects_non_certificate(self):
        with pytest.raises(MalformedCertificate):
            check_certificate({"dim": 2})


def assert_flips(cert, corrupted, must_fail, may_fail=frozenset()):
    rep = check_certificate(corrupted)
    failed = set(rep.failures())
    assert must_fail <= failed, f"expected {must_fail} to fail, got {failed}"
    assert failed <= must_fail | set(may_fail), (
        f"unexpected failures {failed - must_fail - set(may_fail)}"
    )
    assert check_certificate(cert).passed  # the original stays green


class TestFaultInjection:
    def test_shifted_map(self, random_cert):
        bad = replace(random_cert, map_offset=random_cert.map_offset + 0.01)
        assert_flips(random_cert, bad, {"instance_map"})

    def test_inflated_weight(self, random_cert):
        weights = random_cert.contact_weights.copy()
        weights[0] *= 1.5
        assert_flips(random_cert, replace(random_cert, contact_weights=weights), {"decomposition"})

    def test_rewired_contact_index(self, random_cert):
        idx = random_cert.contact_indices.copy()
        outside = [r for r in range(idx.size) if r not in set(random_cert.x_rows.tolist())]
        row = outside[0]
        idx[row] = (idx[row] + 1) % random_cert.normals.shape[0]
        assert_flips(
            random_cert,
            replace(random_cert, contact_indices=idx),
            {"decomposition"},
            may_fail={"subfamily_membership"},
        )

    def test_swapped_basis_rows(self, random_cert):
        swapped = random_cert.basis[[1, 0, 2]]
        assert_flips(
            random_cert,
            replace(random_cert, basis=swapped),
            {"selection_window"},
            may_fail={"simplex_floor"},
        )

    def test_shrunk_boundary_point(self, random_cert):
        d = random_cert.dim
        w = random_cert.w * (0.5 / (d * np.linalg.norm(random_cert.w)))
        assert_flips(
            random_cert,
            replace(random_cert, w=w),
            {"ray_depth"},
            may_fail={"contraction", "hull_chain"},
        )

    def test_moved_ellipsoid_center(self, random_cert):
        assert_flips(
            random_cert,
            replace(random_cert, u=1.3 * random_cert.u),
            {"contraction"},
        )

    def test_inflated_inner_shape(self, random_cert):
        assert_flips(
            random_cert,
            replace(random_cert, e1_shape=1.3 * random_cert.e1_shape),
            {"contraction"},
        )

    def test_shrunk_contracted_shape(self, random_cert):
        assert_flips(
            random_cert,
            replace(random_cert, e2_shape=0.5 * random_cert.e2_shape),
            {"contraction"},
        )

    def test_spec_ratio_overwrite(self, random_cert):
        # the canonical single-witness fault: contraction ratio set to
        # 1/(d+2), below the guaranteed floor; everything else untouched
        bad = replace(random_cert, lam=1.0 / (random_cert.dim + 2))
        assert_flips(random_cert, bad, {"contraction"})

    def test_biased_hull_coefficient(self, random_cert):
        coeffs = random_cert.cara_coeffs.copy()
        coeffs[0] += 0.1
        assert_flips(random_cert, replace(random_cert, cara_coeffs=coeffs), {"hull_chain"})

    def test_doubled_ratio(self, random_cert):
        assert_flips(
            random_cert,
            replace(random_cert, ratio=2.0 * random_cert.ratio),
            {"ratio_volumes"},
        )

    def test_doubled_stored_volume(self, random_cert):
        assert_flips(
            random_cert,
            replace(random_cert, vol_g=2.0 * random_cert.vol_g),
            {"ratio_volumes"},
        )

    def test_halved_bound(self, random_cert):
        assert_flips(
            random_cert,
            replace(random_cert, bound=0.5 * random_cert.bound),
            {"ratio_bound"},
        )

    def test_rewired_subfamily_index(self, random_cert):
        g = random_cert.g_indices.copy()
        g[0] = (g[0] + 1) % random_cert.normals.shape[0]
        assert_flips(
            random_cert,
            replace(random_cert, g_indices=g),
            {"subfamily_membership"},
        )

    def test_moved_selected_point(self, random_cert):
        pts = random_cert.x_points.copy()
        pts[0] = pts[0] + np.array([0.05, 0.0, 0.0])
        assert_flips(
            random_cert,
            replace(random_cert, x_points=pts),
            {"hull_chain"},
            may_fail={
                "subfamily_membership",
                "polar_cover",
                "ratio_volumes",
                "ratio_bound",
                "subfamily_size",
            },
        )

    def test_every_check_is_coverable(self, random_cert):
        # the corruptions above collectively reach every applicable check
        covered = {
            "instance_map",
            "decomposition",
            "selection_window",
            "ray_depth",
            "contraction",
            "hull_chain",
            "ratio_volumes",
            "ratio_bound",
            "subfamily_membership",
        }
        rep = check_certificate(random_cert)
        applicable = {i.name for i in rep.items if i.applicable}
        # simplex_floor, polar_cover and subfamily_size witnesses are shared
        # with neighbouring checks; they are exercised as may_fail members
        assert covered <= applicable

"""Tests for the regime pipelines, driven through problem files."""
from dataclasses import replace

import pytest

from algebra.forms import BasisChange, SymForm, is_primitive, random_equivalent_form, random_unimodular
from components.large_k import admissible_residue
from components.low_dim import (
    EVEN_RANK_TWO_ROWS,
    N2Pipeline,
    N4Pipeline,
    hyperbolic_basis,
    isotropic_vector,
    transport,
)
from core.config import config_manager
from core.exceptions import ConstructionError, DataError, ProblemInputError
from homotopy.expressions import render
from homotopy.hilton import attaching_vector
from homotopy.tables import integral_table
from services.certificates import (
    construct,
    dump_certificate,
    load_problem,
    read_certificate,
    verify_certificate,
    write_certificate,
)

HYPERBOLIC = [[0, 1], [1, 0]]


def _build(problem: dict):
    return construct(load_problem(problem))


def _set_basis_bound(bound: int) -> None:
    search = config_manager.config.search
    config_manager.update_config(search=replace(search, basis_search_bound=bound))


class TestN2Pipeline:
    """Test S^1-fibrations over simply connected 4-manifolds."""

    def test_even_form(self):
        certificate = _build({"n": 2, "k": 2, "inverse": HYPERBOLIC})
        assert certificate.construction == "beta4"
        assert certificate.evidence.tensor_identity
        assert not certificate.evidence.residual
        assert certificate.ok

    def test_odd_form_ends_in_characteristic_vector(self):
        certificate = _build({"n": 2, "k": 2, "inverse": [[1, 0], [0, -1]]})
        assert certificate.construction == "betasimple"
        assert certificate.basis.congruences == {"last vector characteristic": True}
        assert [row[-1] % 2 for row in certificate.basis.matrix] == [1, 1]
        assert certificate.ok

    def test_corrected_pair(self, cp2_pair_problem):
        certificate = _build(cp2_pair_problem)
        assert certificate.evidence.kernel_member
        assert certificate.mu == [[1, 1]]
        assert certificate.ok

    def test_naive_pair_is_rejected(self):
        problem = {"n": 2, "k": 2, "inverse": [[1, 0], [0, -1]], "pair": {"mu": [1, 0], "delta": "[a1, a2]"}}
        certificate = _build(problem)
        assert certificate.evidence.kernel_member is False
        assert not certificate.ok

    def test_wrong_dimension(self):
        with pytest.raises(ProblemInputError):
            N2Pipeline().construct(load_problem({"n": 4, "k": 2, "inverse": HYPERBOLIC}))


class TestN4Pipeline:
    """Test S^3-fibrations over 3-connected 8-manifolds."""

    def test_odd_form(self, odd_n4_problem):
        certificate = _build(odd_n4_problem)
        assert certificate.construction == "odd-form"
        assert all(certificate.basis.congruences.values())
        assert [row[-1] for row in certificate.basis.matrix] == [1, 1, 1]
        assert certificate.basis.torsion_after[-1] == 3
        assert "r = 6" in certificate.transcript
        assert certificate.table == "n4"
        assert certificate.ok

    def test_even_form_of_rank_four(self):
        hyperbolic_sum = [[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]
        certificate = _build({"n": 4, "k": 4, "inverse": hyperbolic_sum, "torsion": [1, 1, 1, 1]})
        assert certificate.construction == "even-form"
        assert certificate.basis.form_after[-1][-1] % 24 == 0
        assert certificate.basis.torsion_after[-1] % 12 == 0
        assert certificate.ok

    def test_hyperbolic_plane(self):
        certificate = _build({"n": 4, "k": 2, "inverse": HYPERBOLIC, "torsion": [1, 1]})
        assert certificate.construction == "even-rank-two"
        assert certificate.mu == [[2, 1]]
        assert certificate.beta[0].expression == "175*nu1 + 44*nu2"
        assert certificate.ok

    @pytest.mark.parametrize("row", EVEN_RANK_TWO_ROWS, ids=lambda r: f"{r.l1}-{r.l2}")
    def test_every_residue_row_certifies(self, row):
        problem = {
            "n": 4,
            "k": 2,
            "inverse": HYPERBOLIC,
            "torsion": [row.l1[0], row.l2[0]],
            "pair": {"mu": list(row.mu), "delta": render(row.delta_expression())},
        }
        assert _build(problem).ok

    def test_hp2_pair(self):
        problem = {"n": 4, "k": 2, "inverse": [[1, 0], [0, -1]], "pair": {"mu": [1, -1], "delta": "nu2"}}
        assert _build(problem).ok

    def test_non_primitive_mu_fails_first_hypothesis(self):
        problem = {"n": 4, "k": 2, "inverse": [[1, 0], [0, -1]], "pair": {"mu": [2, 0], "delta": "nu2"}}
        certificate = _build(problem)
        assert not certificate.hypotheses.condition1
        assert not certificate.ok

    def test_wrong_dimension(self):
        with pytest.raises(ProblemInputError):
            N4Pipeline().construct(load_problem({"n": 2, "k": 2, "inverse": HYPERBOLIC}))

    def test_odd_form_search_exhausted(self):
        _set_basis_bound(0)
        problem = {"n": 4, "k": 3, "inverse": [[1, 0, 0], [0, 1, 0], [0, 0, -1]], "torsion": [0, 0, 1]}
        with pytest.raises(ConstructionError) as excinfo:
            _build(problem)
        assert excinfo.value.transcript

    def test_odd_form_without_admissible_characteristic_vector(self):
        problem = {"n": 4, "k": 2, "inverse": [[109, -33], [-33, 10]], "torsion": [8, 11]}
        with pytest.raises(ConstructionError) as excinfo:
            _build(problem)
        transcript = excinfo.value.transcript
        assert transcript[0].startswith("characteristic vector mod 2")
        assert any(line.startswith("no characteristic vector within bound") for line in transcript)

    def test_hyperbolic_plane_with_large_entries(self):
        problem = {"n": 4, "k": 2, "inverse": [[132, 155], [155, 182]], "torsion": [11, 6]}
        certificate = _build(problem)
        assert certificate.construction == "even-rank-two"
        assert certificate.ok

    def test_hyperbolic_basis_needs_no_search_room(self):
        _set_basis_bound(0)
        g = SymForm.from_rows([[132, 155], [155, 182]])
        assert g.transform(hyperbolic_basis(g)).tolist() == HYPERBOLIC

    def test_hyperbolic_basis_of_random_equivalent_forms(self, rng):
        for _ in range(20):
            g = random_equivalent_form(SymForm.hyperbolic(), rng, steps=12)
            b1 = isotropic_vector(g)
            assert g.norm(b1) == 0
            assert is_primitive(b1)
            assert g.transform(hyperbolic_basis(g)).tolist() == HYPERBOLIC


class TestLocalizedPipeline:
    """Test the construction after inverting a set of primes."""

    def test_hyperbolic_n6(self):
        certificate = _build({"n": 6, "k": 2, "inverse": HYPERBOLIC, "primes": [2]})
        assert certificate.regime == "localized"
        assert certificate.basis.congruences == {"3 | g'_kk": True}
        assert certificate.ok

    def test_rank_two_search(self):
        certificate = _build({"n": 6, "k": 2, "inverse": [[1, 0], [0, -1]], "primes": [2]})
        assert certificate.basis.form_after[-1][-1] % 3 == 0
        assert certificate.ok

    def test_needs_two_inverted(self):
        with pytest.raises(ProblemInputError):
            _build({"n": 6, "k": 2, "inverse": HYPERBOLIC, "primes": [3]})

    def test_torsion_primes_must_be_inverted(self):
        with pytest.raises(ProblemInputError):
            _build({"n": 6, "k": 2, "inverse": HYPERBOLIC, "primes": [2], "torsion_primes": [5]})

    def test_no_basis_with_three_dividing_norm(self):
        with pytest.raises(DataError):
            _build({"n": 6, "k": 2, "inverse": [[1, 0], [0, 1]], "primes": [2]})

    def test_ledger_is_covered(self):
        certificate = _build({"n": 6, "k": 2, "inverse": HYPERBOLIC, "primes": [2]})
        assert certificate.evidence.ledger
        assert all(entry.holds and entry.source for entry in certificate.evidence.ledger)


class TestLargeKPipeline:
    """Test the construction with many cells and trivial stable omega'_k."""

    def test_example(self, large_k_problem):
        certificate = _build(large_k_problem)
        assert certificate.construction == "large-k"
        b = [row[-1] for row in certificate.basis.matrix]
        x = [row[0] for row in large_k_problem["stable_coordinates"]]
        assert sum(bi * xi for bi, xi in zip(b, x)) % 3 == 0
        assert certificate.basis.form_after[-1][-1] % 3 == 0
        assert all(certificate.basis.congruences.values())
        assert len(certificate.evidence.ledger) == 3
        assert certificate.ok

    def test_form_without_admissible_residue(self, large_k_problem):
        large_k_problem["inverse"] = [[30, 41], [41, 56]]
        large_k_problem["stable_coordinates"] = [[14], [6]]
        with pytest.raises(ConstructionError, match="exists") as excinfo:
            _build(large_k_problem)
        assert "no residue class mod 3 meets both conditions" in excinfo.value.transcript

    def test_intersection_reading_of_same_form_is_admissible(self, large_k_problem):
        large_k_problem["intersection"] = [[30, 41], [41, 56]]
        del large_k_problem["inverse"]
        large_k_problem["stable_coordinates"] = [[14], [6]]
        certificate = _build(large_k_problem)
        assert certificate.basis.form_after[-1][-1] % 3 == 0
        assert certificate.ok

    def test_k_must_exceed_summands(self, large_k_problem):
        large_k_problem["stable_model"] = {
            "unstable_factors": [3],
            "stable_factors": [3, 3],
            "suspension": [[1], [1]],
        }
        with pytest.raises(ProblemInputError):
            _build(large_k_problem)

    def test_needs_stable_model(self, large_k_problem):
        del large_k_problem["stable_model"]
        del large_k_problem["stable_coordinates"]
        with pytest.raises(ProblemInputError):
            _build(large_k_problem)


def _round_trip(certificate, path):
    stored = read_certificate(write_certificate(certificate, path))
    assert dump_certificate(verify_certificate(stored)) == dump_certificate(certificate)


def _rows(matrix):
    return [[int(x) for x in row] for row in matrix.tolist()]


class TestRandomizedConstructions:
    """Seeded random inputs in every regime certify and re-verify from disk."""

    @pytest.mark.parametrize("k,seeds", [
        (2, [[1, 1], [1, -1], None]),
        (3, [[1, 1, 1], [1, 1, -1], [1, -1, -1]]),
        (4, [[1, 1, 1, -1], [1, 1, -1, -1], None]),
    ])
    def test_n2_random_forms(self, k, seeds, rng, tmp_path):
        for t in range(20):
            seed = rng.choice(seeds)
            base = SymForm.diagonal(seed) if seed else SymForm.hyperbolic(k // 2)
            g = random_equivalent_form(base, rng)
            certificate = _build({"n": 2, "k": k, "inverse": _rows(g)})
            assert certificate.ok
            _round_trip(certificate, tmp_path / f"n2-{k}-{t}.yaml")

    def test_n4_random_odd_forms(self, rng, tmp_path):
        for t in range(20):
            g = random_equivalent_form(SymForm.diagonal(rng.choice([[1, 1, -1], [1, -1, -1]])), rng)
            torsion = [rng.randrange(12) for _ in range(3)]
            certificate = _build({"n": 4, "k": 3, "inverse": _rows(g), "torsion": torsion})
            assert certificate.construction == "odd-form"
            assert all(certificate.basis.congruences.values())
            assert certificate.ok
            _round_trip(certificate, tmp_path / f"odd-{t}.yaml")

    def test_n4_random_hyperbolic_forms(self, rng, tmp_path):
        table = integral_table(4)
        for t in range(20):
            row = rng.choice(EVEN_RANK_TWO_ROWS)
            l1 = row.l1[0] + 12 * rng.randint(-2, 2)
            l2 = row.l2[0] + 12 * rng.randint(-2, 2)
            L = attaching_vector(table, HYPERBOLIC, [l1, l2])
            moved = transport(L, BasisChange(random_unimodular(2, rng)))
            problem = {"n": 4, "k": 2, "inverse": _rows(moved.form), "torsion": [int(x) for x in moved.torsion]}
            certificate = _build(problem)
            assert certificate.construction == "even-rank-two"
            assert certificate.ok
            _round_trip(certificate, tmp_path / f"even-{t}.yaml")

    @pytest.mark.parametrize("r", [1, 2, 3])
    def test_large_k_grid(self, r, rng, tmp_path):
        factors = [3] * r
        model = {
            "unstable_factors": factors,
            "stable_factors": factors,
            "suspension": [[int(i == j) for j in range(r)] for i in range(r)],
        }
        for k in range(r + 1, r + 4):
            drawn = 0
            while drawn < 3:
                g = random_equivalent_form(SymForm.diagonal([1] * (k - 1) + [-1]), rng)
                coordinates = [[rng.randrange(3) for _ in range(r)] for _ in range(k)]
                if admissible_residue(g, coordinates, factors) is None:
                    continue
                problem = {
                    "n": 10,
                    "k": k,
                    "inverse": _rows(g),
                    "primes": [2],
                    "regime": "large_k",
                    "stable_model": model,
                    "stable_coordinates": coordinates,
                }
                certificate = _build(problem)
                assert certificate.basis.form_after[-1][-1] % 3 == 0
                assert all(certificate.basis.congruences.values())
                assert certificate.ok
                _round_trip(certificate, tmp_path / f"large-{r}-{k}-{drawn}.yaml")
                drawn += 1

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from mrhetero import (
    DegenerateGenotype,
    DuplicateSnpId,
    EmptyIntersection,
    HarmonizedTriple,
    MalformedRow,
    MissingColumn,
    SnpRecord,
    as_triple_arrays,
    harmonize,
    marginal_regression,
    marginal_regressions,
    parse_summary_file,
)

from conftest import wls_intercept_normal_equations


def write_tsv(path, rows, header="snp\teffect_allele\tother_allele\tbeta\tse\tn"):
    path.write_text(header + "\n" + "".join(r + "\n" for r in rows), encoding="utf-8")
    return path


class TestParse:
    def test_default_mapping(self, tmp_path):
        f = write_tsv(tmp_path / "a.tsv", ["rs1\tA\tG\t0.05\t0.01\t1000"])
        (rec,) = parse_summary_file(f)
        assert rec == SnpRecord("rs1", "A", "G", 0.05, 0.01, 1000)

    def test_zero_se_is_malformed(self, tmp_path):
        f = write_tsv(tmp_path / "a.tsv", ["rs1\tA\tG\t0.05\t0\t1000"])
        with pytest.raises(MalformedRow) as exc:
            parse_summary_file(f)
        assert exc.value.details["line"] == 2

    def test_duplicate_id(self, tmp_path):
        f = write_tsv(tmp_path / "a.tsv",
                      ["rs1\tA\tG\t0.05\t0.01\t1000", "rs1\tA\tG\t0.06\t0.01\t1000"])
        with pytest.raises(DuplicateSnpId):
            parse_summary_file(f)

    def test_missing_column(self, tmp_path):
        f = write_tsv(tmp_path / "a.tsv", ["rs1\tA\tG\t0.05\t1000"],
                      header="snp\teffect_allele\tother_allele\tbeta\tn")
        with pytest.raises(MissingColumn) as exc:
            parse_summary_file(f)
        assert exc.value.details["column"] == "se"

    def test_lenient_counts_and_drops(self, tmp_path):
        f = write_tsv(tmp_path / "a.tsv",
                      ["rs1\tA\tG\tnot_a_number\t0.01\t1000", "rs2\tA\tG\t0.05\t0.01\t1000"])
        with pytest.warns(UserWarning, match="dropped 1 malformed"):
            records = parse_summary_file(f, lenient=True)
        assert [r.snp_id for r in records] == ["rs2"]

    def test_strict_rejects_unparseable(self, tmp_path):
        f = write_tsv(tmp_path / "a.tsv", ["rs1\tA\tG\tx\t0.01\t1000"])
        with pytest.raises(MalformedRow):
            parse_summary_file(f)

    def test_column_remap_and_optional_n(self, tmp_path):
        f = write_tsv(tmp_path / "a.tsv", ["rs9\tt\tc\t-0.2\t0.05"],
                      header="rsid\tEA\tOA\tb\tstderr")
        (rec,) = parse_summary_file(
            f, columns={"snp": "rsid", "effect_allele": "EA", "other_allele": "OA",
                        "beta": "b", "se": "stderr"})
        assert rec.n is None
        assert rec.effect_allele == "T"  # normalized to upper case

    def test_identical_alleles_rejected(self):
        with pytest.raises(ValueError):
            SnpRecord("rs1", "A", "A", 0.1, 0.1)


def rec(sid, ea, oa, beta, se=0.01):
    return SnpRecord(sid, ea, oa, beta, se)


class TestHarmonize:
    def test_sign_flip_on_allele_swap(self):
        tr = [rec("rs1", "A", "G", 0.05)]
        oug = [rec("rs1", "G", "A", -0.04)]
        ouy = [rec("rs1", "A", "G", 0.01)]
        triples, report = harmonize(tr, oug, ouy)
        assert triples[0].gamma_ou == pytest.approx(0.04)
        assert report.flipped == 1 and report.kept == 1

    def test_mismatch_dropped(self):
        tr = [rec("rs1", "A", "G", 0.05), rec("rs2", "A", "G", 0.07)]
        oug = [rec("rs1", "A", "G", 0.04), rec("rs2", "C", "T", 0.07)]
        ouy = [rec("rs1", "A", "G", 0.01), rec("rs2", "C", "T", 0.02)]
        triples, report = harmonize(tr, oug, ouy)
        assert [t.snp_id for t in triples] == ["rs1"]
        assert report.dropped_mismatch == 1

    def test_identity_case(self):
        tr = [rec(f"rs{i}", "A", "G", 0.01 * i) for i in range(1, 4)]
        oug = [rec(f"rs{i}", "A", "G", 0.01 * i) for i in range(1, 4)]
        ouy = [rec(f"rs{i}", "A", "G", 0.02 * i) for i in range(1, 4)]
        triples, report = harmonize(tr, oug, ouy)
        assert report.kept == 3 and report.flipped == 0

    def test_palindromic_policies(self):
        tr = [rec("rs1", "A", "T", 0.05), rec("rs2", "C", "G", 0.05), rec("rs3", "A", "G", 0.05)]
        oug = [rec("rs1", "A", "T", 0.04), rec("rs2", "C", "G", 0.04), rec("rs3", "A", "G", 0.04)]
        ouy = [rec("rs1", "A", "T", 0.01), rec("rs2", "C", "G", 0.01), rec("rs3", "A", "G", 0.01)]
        triples, report = harmonize(tr, oug, ouy, policy="drop")
        assert [t.snp_id for t in triples] == ["rs3"]
        assert report.dropped_palindromic == 2
        triples, report = harmonize(tr, oug, ouy, policy="keep")
        assert report.kept == 3 and report.dropped_palindromic == 0

    def test_missing_counted_from_union(self):
        tr = [rec("rs1", "A", "G", 0.05), rec("rs2", "A", "G", 0.05)]
        oug = [rec("rs1", "A", "G", 0.04), rec("rs3", "A", "G", 0.04)]
        ouy = [rec("rs1", "A", "G", 0.01)]
        triples, report = harmonize(tr, oug, ouy)
        assert report.kept == 1 and report.dropped_missing == 2
        # accounting: categories within the intersection sum to its size
        assert report.kept + report.dropped_mismatch + report.dropped_palindromic == 1

    def test_empty_intersection(self):
        with pytest.raises(EmptyIntersection):
            harmonize([rec("rs1", "A", "G", 0.1)], [rec("rs2", "A", "G", 0.1)],
                      [rec("rs3", "A", "G", 0.1)])

    def test_idempotent(self):
        tr = [rec("rs1", "A", "G", 0.05), rec("rs2", "T", "C", -0.03)]
        oug = [rec("rs1", "G", "A", -0.04), rec("rs2", "T", "C", -0.02)]
        ouy = [rec("rs1", "A", "G", 0.01), rec("rs2", "C", "T", 0.05)]
        triples, _ = harmonize(tr, oug, ouy)

        def as_records(field_beta, field_se):
            return [SnpRecord(t.snp_id, tr_rec.effect_allele, tr_rec.other_allele,
                              getattr(t, field_beta), getattr(t, field_se))
                    for t, tr_rec in zip(triples, tr)]

        again, report = harmonize(as_records("gamma_tr", "se_gamma_tr"),
                                  as_records("gamma_ou", "se_gamma_ou"),
                                  as_records("capgamma_ou", "se_capgamma_ou"))
        assert report.flipped == 0
        assert again == triples

    def test_sign_flip_symmetry(self):
        tr = [rec("rs1", "A", "G", 0.05), rec("rs2", "T", "C", -0.03)]
        oug = [rec("rs1", "A", "G", 0.04), rec("rs2", "T", "C", -0.02)]
        ouy = [rec("rs1", "A", "G", 0.01), rec("rs2", "T", "C", 0.05)]
        base, _ = harmonize(tr, oug, ouy)
        flipped_oug = [SnpRecord(r.snp_id, r.other_allele, r.effect_allele, -r.beta, r.se)
                       for r in oug]
        flipped, _ = harmonize(tr, flipped_oug, ouy)
        assert flipped == base


class TestMarginalRegression:
    def test_perfect_fit(self):
        beta, se = marginal_regression([0, 1, 2], [0, 1, 2])
        assert (beta, se) == (1.0, 0.0)

    def test_exact_affine(self):
        beta, se = marginal_regression([0, 1, 2, 1], [1, 3, 5, 3])
        assert (beta, se) == (2.0, 0.0)

    def test_matches_normal_equation_oracle(self, rng):
        z = rng.standard_normal(50)
        y = 0.7 * z + rng.standard_normal(50)
        beta, se = marginal_regression(z, y)
        slope_oracle, intercept_oracle = wls_intercept_normal_equations(z, y, np.ones(50))
        assert_allclose(beta, slope_oracle, rtol=0, atol=1e-10)
        # residual-based se against the explicit residual sum of squares
        resid = y - intercept_oracle - slope_oracle * z
        zc = z - z.mean()
        se_oracle = np.sqrt((resid @ resid) / 48 / (zc @ zc))
        assert_allclose(se, se_oracle, rtol=1e-10)

    def test_constant_genotype(self):
        with pytest.raises(DegenerateGenotype):
            marginal_regression([1.0, 1.0, 1.0], [0.0, 1.0, 2.0])

    @settings(max_examples=50, deadline=None)
    @given(
        a=st.floats(-100, 100),
        b=st.floats(-50, 50),
        seed=st.integers(0, 2**32 - 1),
        n=st.integers(3, 40),
    )
    def test_affine_response_recovers_slope(self, a, b, seed, n):
        z = np.random.default_rng(seed).uniform(-5, 5, n)
        if np.ptp(z) < 1e-6:
            return
        beta, se = marginal_regression(z, a + b * z)
        scale = 1.0 + abs(a) + abs(b)
        assert abs(beta - b) < 1e-7 * scale
        assert se < 1e-6 * scale

    def test_vectorized_matches_scalar(self, rng):
        Z = rng.integers(0, 3, size=(60, 7)).astype(float)
        y = rng.standard_normal(60) + Z @ rng.uniform(0.1, 0.3, 7)
        betas, ses = marginal_regressions(Z, y)
        for j in range(7):
            b, s = marginal_regression(Z[:, j], y)
            assert_allclose(betas[j], b, rtol=1e-9)
            assert_allclose(ses[j], s, rtol=1e-9)


class TestTripleArrays:
    def test_sequence_roundtrip(self):
        triples = [HarmonizedTriple("rs1", 0.1, 0.01, 0.2, 0.02, 0.05, 0.01),
                   HarmonizedTriple("rs2", -0.1, 0.02, -0.15, 0.01, -0.04, 0.02)]
        arrays = as_triple_arrays(triples)
        assert list(arrays) == triples
        assert len(arrays) == 2
        sub = arrays.take([1, 1, 0])
        assert sub[0] == triples[1] and sub[2] == triples[0]

    def test_positive_se_enforced(self):
        with pytest.raises(ValueError):
            HarmonizedTriple("rs1", 0.1, 0.0, 0.2, 0.02, 0.05, 0.01)

"""Tests for table loading, checksums and rule consistency."""
from dataclasses import replace

import pytest

from core.config import config_manager
from core.exceptions import TableError
from homotopy.tables import (
    TABLE_CHECKSUMS,
    TableLoader,
    default_loader,
    file_checksum,
    generic_facts,
    integral_table,
    table_names,
)


class TestShippedTables:
    """Test the tables that ship with the package."""

    @pytest.mark.parametrize("name", ["n2", "n4", "n8", "generic"])
    def test_checksums_are_pinned(self, name):
        assert default_loader().check(name) == TABLE_CHECKSUMS[name]

    def test_pinned_values(self):
        assert TABLE_CHECKSUMS["n2"] == "c43fb8006d8023ff92219c40a9b5eafbba0a279a68db6f40e4943bb75c668422"
        assert TABLE_CHECKSUMS["n4"] == "09e32916950f5b26787b7e9b60ed88269cb0de55bd61f483890303e1047a100d"
        assert TABLE_CHECKSUMS["n8"] == "dd13b77ec20a06cd711fc5104646d637ed75cedf190d29f3991ce1782fdf7cb9"
        assert TABLE_CHECKSUMS["generic"] == "48d32c7678667b0ca34a5f4719a22caad02cf16f3c642c190ef5994f0fa11ce3"

    def test_table_names(self):
        assert table_names() == ["n2", "n4", "n8", "generic"]

    @pytest.mark.parametrize("n,hopf,torsion", [(2, "eta", None), (4, "nu", "nup"), (8, "sigma", "sigmap")])
    def test_hopf_and_torsion_classes(self, n, hopf, torsion):
        table = integral_table(n)
        assert table.hopf_class == hopf
        assert table.torsion_class == torsion
        assert table.middle_degree == 2 * n - 1
        assert table.top_degree == 3 * n - 2

    def test_n4_groups(self):
        table = integral_table(4)
        assert table.middle.factors == (0, 12)
        assert table.stem.factors == (24,)
        assert table.top.factors == (24, 3)
        assert table.classifying_modulus == 12

    def test_n8_variants(self):
        assert default_loader().variants("n8") == ("plus", "minus")
        plus = integral_table(8)
        minus = integral_table(8, "minus")
        assert plus.variant == "plus"
        assert minus.variant == "minus"
        assert plus != minus

    @pytest.mark.parametrize("n,variant", [(2, None), (4, None), (8, "plus"), (8, "minus")])
    def test_brackets_agree_with_fold_map(self, n, variant):
        table = integral_table(n, variant)
        for gen in table.middle.names:
            assert table.folded_bracket(gen) == table.top.reduce(table.brackets[gen])

    def test_n8_sigma_rule_has_opposite_sign_to_triple(self):
        for variant, sign in (("plus", 1), ("minus", -1)):
            table = integral_table(8, variant)
            u = table.top.index("u")
            assert table.triple[u] == (8 * sign) % 24
            assert table.brackets["sigma"][u] == (-1 - 8 * sign) % 24
            assert table.brackets["sigmap"][u] == -2 % 24

    def test_unknown_variant(self):
        with pytest.raises(TableError):
            integral_table(8, "sideways")
        with pytest.raises(TableError):
            integral_table(4, "plus")

    def test_no_integral_table(self):
        with pytest.raises(TableError):
            integral_table(6)

    def test_generic_sources(self):
        facts = generic_facts()
        for key in ("triple_torsion", "suspension_bracket", "splitting", "rho_injective"):
            assert facts.source(key)
            assert facts.statement(key)

    def test_loader_caches(self):
        loader = default_loader()
        assert loader.load("n4") is loader.load("n4")


class TestDamagedTables:
    """Test missing, corrupted and malformed table files."""

    def test_corrupted_copy_fails_checksum(self, table_copy):
        path = table_copy / "n4.yaml"
        path.write_text(path.read_text() + "# edited\n")
        loader = TableLoader(table_copy, verify_checksums=True)
        with pytest.raises(TableError, match="checksum"):
            loader.load("n4")

    def test_unverified_copy_loads(self, table_copy):
        path = table_copy / "n4.yaml"
        path.write_text(path.read_text() + "# edited\n")
        loader = TableLoader(table_copy, verify_checksums=False)
        assert loader.check("n4") == file_checksum(path)
        assert loader.load("n4").name == "n4"

    def test_missing_table(self, table_copy):
        (table_copy / "n8.yaml").unlink()
        loader = TableLoader(table_copy)
        assert not loader.exists("n8")
        with pytest.raises(TableError, match="not found"):
            loader.load("n8")

    def test_wrong_format(self, table_copy):
        (table_copy / "n2.yaml").write_text("format: something-else\n")
        with pytest.raises(TableError):
            TableLoader(table_copy, verify_checksums=False).load("n2")

    def test_malformed_rules(self, table_copy):
        (table_copy / "n2.yaml").write_text("format: sphere-table/1\nname: n2\nn: 2\n")
        with pytest.raises(TableError, match="malformed"):
            TableLoader(table_copy, verify_checksums=False).load("n2")

    def test_inconsistent_triple(self, table_copy):
        path = table_copy / "n4.yaml"
        path.write_text(path.read_text().replace("triple: {y: 1}", "triple: {y: 2}"))
        with pytest.raises(TableError, match="disagrees"):
            TableLoader(table_copy, verify_checksums=False).load("n4")

    def test_same_sign_variant_fails_fold_check(self, table_copy):
        path = table_copy / "n8.yaml"
        text = path.read_text().replace(
            "      sigma: {u: -8}\n    triple: {u: 8}",
            "      sigma: {u: 8}\n      sigmap: {u: 8}\n    triple: {u: 8}",
        )
        assert "sigmap: {u: 8}" in text
        path.write_text(text)
        with pytest.raises(TableError, match="does not match"):
            TableLoader(table_copy, verify_checksums=False).load("n8", "plus")

    def test_default_loader_follows_config(self, table_copy):
        tables = config_manager.config.tables
        config_manager.update_config(tables=replace(tables, table_dir=table_copy))
        assert default_loader().table_dir == table_copy

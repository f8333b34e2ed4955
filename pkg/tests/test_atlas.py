import numpy as np
import pytest

from oscillab.atlas import (
    CODE_IDS,
    Classification,
    SweepConfig,
    behavior_set,
    classify_cell,
    conjecture_audit,
    curve_band_mask,
    load_sweep_config,
    run_sweep,
    so_region_report,
    sweep_mesh_cells,
    theoretical_curves,
)
from oscillab.diagnostics import RunFlags


def flags_for(stable=True, oscillatory=False, monotone=True, diverged=None):
    return RunFlags(stable=stable, oscillatory=oscillatory,
                    temporally_monotone=monotone, diverged_at_step=diverged,
                    max_inf_norm_ratio=1.0)


@pytest.fixture(scope="module")
def ftcs_map():
    # resolution 40 keeps the thin oscillation-free band wider than the
    # one-cell curve exclusion zone
    cfg = SweepConfig(equation="heat", scheme="ftcs", resolution=40,
                      emit=frozenset())
    return run_sweep(cfg)


@pytest.fixture(scope="module")
def cn_map():
    cfg = SweepConfig(equation="heat", scheme="cn", resolution=14,
                      emit=frozenset())
    return run_sweep(cfg)


class TestClassifyCell:
    def test_plain_codes(self):
        assert classify_cell(flags_for(), None).code == "OFS"
        assert classify_cell(flags_for(oscillatory=True), None).code == "SO"
        assert classify_cell(flags_for(stable=False, diverged=12), None).code == "U"
        assert classify_cell(flags_for(stable=False, oscillatory=True,
                                       diverged=12), None).code == "UO"

    def test_spectral_override(self):
        assert classify_cell(flags_for(oscillatory=True), None,
                             spectral_oscillation=False).code == "OFS"
        assert classify_cell(flags_for(), None,
                             spectral_oscillation=True).code == "SO"

    def test_unknown_code_rejected(self):
        with pytest.raises(ValueError):
            Classification("stable")


class TestSweepConfig:
    def test_validation(self):
        with pytest.raises(ValueError, match="unknown equation"):
            SweepConfig(equation="advection")
        with pytest.raises(ValueError, match="unknown scheme"):
            SweepConfig(scheme="leapfrog")
        with pytest.raises(ValueError, match="ranges"):
            SweepConfig(dx_range=(1.0, 0.5))
        with pytest.raises(ValueError, match="resolution"):
            SweepConfig(resolution=1)
        with pytest.raises(ValueError, match="emit"):
            SweepConfig(emit=frozenset({"pdf"}))

    def test_json_round_trip(self, tmp_path):
        import json

        cfg = SweepConfig(equation="fisher", scheme="btcs-frozen",
                          resolution=7, dt_range=(0.05, 0.7),
                          emit=frozenset({"csv", "report"}), mode_seed=0.02)
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg.to_dict()))
        loaded = load_sweep_config(path)
        assert loaded.equation == "fisher"
        assert loaded.scheme == "btcs-frozen"
        assert loaded.resolution == 7
        assert loaded.dt_range == (0.05, 0.7)
        assert loaded.emit == frozenset({"csv", "report"})
        assert loaded.mode_seed == 0.02

    def test_mesh_floor(self):
        # coarse columns keep at least two interior nodes
        assert sweep_mesh_cells(1.0, 1.0) == 3
        assert sweep_mesh_cells(1.0, 0.5) == 3
        assert sweep_mesh_cells(1.0, 0.1) == 10


class TestRunSweep:
    def test_smallest_all_unstable(self):
        cfg = SweepConfig(equation="heat", scheme="ftcs", resolution=2,
                          dx_range=(0.5, 1.0), dt_range=(0.5, 1.0),
                          emit=frozenset())
        m = run_sweep(cfg)
        for i in range(2):
            for j in range(2):
                assert m.code_name(i, j) in ("U", "UO")

    def test_btcs_all_ofs(self):
        cfg = SweepConfig(equation="heat", scheme="btcs", resolution=6,
                          emit=frozenset())
        m = run_sweep(cfg)
        assert m.code_counts() == {"OFS": 36}

    def test_ftcs_three_bands(self, ftcs_map):
        counts = ftcs_map.code_counts(collapse_uo=True)
        assert counts.get("OFS", 0) > 0
        assert counts.get("U", 0) > 0
        # bands are vertically ordered per column: OFS then oscillatory then U
        rank = {CODE_IDS["OFS"]: 0, CODE_IDS["SO"]: 1, CODE_IDS["UO"]: 1,
                CODE_IDS["U"]: 2}
        for i in range(ftcs_map.shape[0]):
            ranks = [rank[c] for c in ftcs_map.codes[i]]
            drops = sum(1 for a, b in zip(ranks, ranks[1:]) if b < a)
            assert drops <= 2

    def test_order_independent_with_workers(self):
        base = SweepConfig(equation="heat", scheme="ftcs", resolution=6,
                           emit=frozenset())
        serial = run_sweep(base)
        from dataclasses import replace

        parallel = run_sweep(replace(base, workers=2))
        np.testing.assert_array_equal(serial.codes, parallel.codes)
        np.testing.assert_array_equal(serial.rho, parallel.rho)

    def test_invalid_cells_do_not_abort(self):
        # the semi-implicit system is singular at dt = 1 on the zero state
        cfg = SweepConfig(equation="fisher", scheme="semi", resolution=4,
                          dt_range=(0.4, 1.0), emit=frozenset())
        m = run_sweep(cfg)
        assert m.code_counts().get("Invalid", 0) > 0

    def test_spectra_summaries_match_closed_form(self, ftcs_map):
        from oscillab.spectral import heat_ftcs_eigenvalues

        i, j = 20, 0
        dx = ftcs_map.dx_effective[i]
        dt = ftcs_map.dt_axis[j]
        n = round(1 / dx) - 1
        lams = heat_ftcs_eigenvalues(dt / dx**2, n).eigenvalues
        assert ftcs_map.min_re[i, j] == pytest.approx(lams.min(), abs=1e-12)
        assert ftcs_map.max_re[i, j] == pytest.approx(lams.max(), abs=1e-12)
        assert ftcs_map.rho[i, j] == pytest.approx(np.abs(lams).max(), abs=1e-12)


class TestCurvesAndAudits:
    def test_theoretical_curves_ftcs(self):
        cfg = SweepConfig(equation="heat", scheme="ftcs", resolution=4,
                          emit=frozenset())
        curves = {c.kind: c for c in theoretical_curves(cfg)}
        vn = curves["vn-stability"]
        assert not vn.unconditional
        mid = vn.samples[100]
        assert mid[1] == pytest.approx(mid[0]**2 / 2, rel=1e-4)
        pos = curves["positive-eigenvalue"]
        assert pos.samples[100][1] < mid[1]

    def test_theoretical_curves_btcs_unconditional(self):
        cfg = SweepConfig(equation="heat", scheme="btcs", resolution=4,
                          emit=frozenset())
        curves = {c.kind: c for c in theoretical_curves(cfg)}
        assert curves["vn-stability"].unconditional
        assert curves["positive-eigenvalue"].unconditional
        assert curves["dominance"].unconditional

    def test_cn_positive_curve_finite(self):
        cfg = SweepConfig(equation="heat", scheme="cn", resolution=4,
                          emit=frozenset())
        curves = {c.kind: c for c in theoretical_curves(cfg)}
        assert curves["vn-stability"].unconditional
        pos = curves["positive-eigenvalue"]
        assert not pos.unconditional
        # min eigenvalue crosses zero near r = 1/2
        dx, bound = pos.samples[100]
        assert bound == pytest.approx(dx**2 / 2, rel=0.1)

    def test_band_mask_tracks_curves(self, ftcs_map):
        band = curve_band_mask(ftcs_map)
        assert band.any()
        assert not band.all()

    def test_ftcs_audits_consistent(self, ftcs_map):
        audits = {a.conjecture_id: a for a in conjecture_audit(ftcs_map)}
        assert audits["C1"].consistency >= 0.95
        assert audits["C2"].consistency >= 0.95
        assert audits["C4"].consistency == 1.0
        assert audits["C3"].cells_tested == 0  # linear equation

    def test_cn_audit_not_silent(self, cn_map):
        audits = {a.conjecture_id: a for a in conjecture_audit(cn_map)}
        so = so_region_report(cn_map)
        assert audits["C2"].counterexamples or so.get("cell_count", 0) > 0

    def test_cn_front_fit_is_straight(self, cn_map):
        so = so_region_report(cn_map)
        assert so["cell_count"] > 0
        fit = so.get("front_fit")
        assert fit is not None
        assert fit["r_squared"] > 0.85
        assert 0.15 < fit["slope"] < 0.6


class TestBehaviorSet:
    def test_btcs_set(self):
        cfg = SweepConfig(equation="heat", scheme="btcs", resolution=6,
                          emit=frozenset())
        assert behavior_set(run_sweep(cfg)) == {"OFS"}

    def test_ftcs_set(self, ftcs_map):
        codes = behavior_set(ftcs_map, min_fraction=0.01)
        assert codes == {"OFS", "U"}

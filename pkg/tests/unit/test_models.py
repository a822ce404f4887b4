"""
Unit tests for shallow-water data models
"""

from unittest.mock import patch

import numpy as np
import pytest

from modules.shallow_water.errors import ValidationError
from modules.shallow_water.models import (
    CaseId, ConservedDiagnostics, EquationId, EvolutionConfig, Field2D, Grid2D, PhysicalParams,
    ResidualMode, ResidualReport, SolutionFamily, SolutionKind, WaveParams
)


class TestEquationId:
    """Test EquationId helpers"""

    @pytest.mark.unit
    def test_bottom_variants(self):
        """Test bottom tagging and flat counterparts"""
        assert EquationId.KDV_2P1_BOTTOM.is_bottom
        assert EquationId.KDV_2P1_BOTTOM.flat_counterpart is EquationId.KDV_2P1
        assert EquationId.GARDNER_2P1_BOTTOM.flat_counterpart is EquationId.GARDNER_2P1
        assert EquationId.KP_MOVING.flat_counterpart is EquationId.KP_MOVING
        assert not EquationId.GARDNER_1P1.is_bottom

    @pytest.mark.unit
    def test_kp_forms(self):
        """Test which equations lead with u_xt"""
        kp_forms = {eq for eq in EquationId if eq.is_kp_form}
        assert kp_forms == {EquationId.KP_FIXED_FRAME, EquationId.KP_CLASSICAL,
                            EquationId.KP_MOVING, EquationId.FIFTH_KP_TYPE}


class TestSolutionKind:
    """Test SolutionKind classification"""

    @pytest.mark.unit
    def test_classification(self):
        """Test physical, KP and superposition flags"""
        assert SolutionKind.CNOIDAL_PHYS.is_physical
        assert not SolutionKind.CNOIDAL_MATH.is_physical
        assert SolutionKind.KP_SUPERPOSITION.is_kp
        assert SolutionKind.KP_SUPERPOSITION.is_superposition
        assert SolutionKind.SUPERPOSITION_MATH_MINUS.is_superposition
        assert SolutionKind.KP_SOLITON.is_soliton
        assert not SolutionKind.CNOIDAL_PHYS.is_soliton


class TestPhysicalParams:
    """Test PhysicalParams validation and regime warnings"""

    @pytest.mark.unit
    def test_valid_params(self, table_params):
        """Test reference parameters validate cleanly"""
        assert table_params.validate() == []
        table_params.require_valid()

    @pytest.mark.unit
    def test_invalid_params(self):
        """Test every sign violation is reported"""
        p = PhysicalParams(alpha=0.0, beta=-1.0, gamma=-0.1, delta=-0.1, tau=-1.0)
        errors = p.validate()
        assert len(errors) == 5
        with pytest.raises(ValidationError) as exc_info:
            p.require_valid()
        assert exc_info.value.exit_code == 2

    @pytest.mark.unit
    def test_regime_warning_logged(self):
        """Test a ratio far from O(1) is logged as a warning"""
        with patch("modules.shallow_water.models.logger") as mock_logger:
            PhysicalParams(alpha=0.1, beta=0.1, gamma=0.5, regime=CaseId.CASE5)
            assert mock_logger.warning.called
            assert "gamma/beta^2" in mock_logger.warning.call_args[0][0]

    @pytest.mark.unit
    def test_consistent_regime_is_silent(self):
        """Test consistent ratios produce no warnings"""
        p = PhysicalParams(alpha=0.1, beta=0.1, gamma=0.01, delta=0.1, regime=CaseId.CASE5)
        assert p.regime_warnings() == []

    @pytest.mark.unit
    def test_transverse_lambda(self, table_params):
        """Test lambda defaults to the moving-frame value"""
        assert table_params.transverse_lambda == pytest.approx((4.0 / 3.0) * 0.05 / (0.15 * 0.1))
        assert table_params.with_changes(kp_lambda=-2.0).transverse_lambda == -2.0

    @pytest.mark.unit
    def test_dict_round_trip(self):
        """Test to_dict/from_dict preserve every field"""
        p = PhysicalParams(alpha=0.15, beta=0.1, gamma=0.05, delta=0.01, tau=0.2,
                           regime=CaseId.CASE6, kp_lambda=1.5)
        assert PhysicalParams.from_dict(p.to_dict()) == p


class TestWaveParams:
    """Test WaveParams"""

    @pytest.mark.unit
    def test_validate(self):
        """Test k=0 and m outside [0, 1] are rejected"""
        errors = WaveParams(k=0.0, l=0.5, omega=1.0, m=1.5, amplitude_a=1.0).validate()
        assert "k must be nonzero" in errors
        assert "m must lie in [0, 1]" in errors

    @pytest.mark.unit
    def test_wavenumber(self):
        """Test the wavenumber magnitude"""
        assert WaveParams(k=3.0, l=4.0, omega=1.0, m=1.0, amplitude_a=1.0).wavenumber == 5.0


class TestSolutionFamily:
    """Test SolutionFamily serialization"""

    @pytest.mark.unit
    def test_document_carries_convention(self, soliton_family):
        """Test the document names its format and m convention"""
        document = soliton_family.to_dict()
        assert document["format_version"] == 1
        assert "elliptic parameter" in document["parameter_convention"]
        assert SolutionFamily.from_dict(document) == soliton_family

    @pytest.mark.unit
    def test_unknown_version(self, soliton_family):
        """Test an unknown format version is rejected"""
        document = soliton_family.to_dict()
        document["format_version"] = 99
        with pytest.raises(ValidationError):
            SolutionFamily.from_dict(document)

    @pytest.mark.unit
    def test_malformed_document(self):
        """Test missing keys raise a validation error"""
        with pytest.raises(ValidationError):
            SolutionFamily.from_dict({"kind": "soliton"})


class TestGrid2D:
    """Test Grid2D"""

    @pytest.mark.unit
    def test_coordinates(self):
        """Test spacing and coordinate arrays"""
        grid = Grid2D(16, 8, 4.0, 2.0)
        assert grid.dx == 0.25
        assert grid.dy == 0.25
        assert grid.x[-1] == pytest.approx(3.75)
        x, y = grid.mesh()
        assert x.shape == (16, 8)
        assert np.all(x[:, 0] == grid.x)
        assert np.all(y[0, :] == grid.y)

    @pytest.mark.unit
    @pytest.mark.parametrize("nx, ny, lx, ly", [(12, 8, 1.0, 1.0), (4, 8, 1.0, 1.0), (8, 8, 0.0, 1.0)])
    def test_invalid_grids(self, nx, ny, lx, ly):
        """Test non-power-of-two sizes, tiny grids and empty boxes"""
        with pytest.raises(ValidationError):
            Grid2D(nx, ny, lx, ly)


class TestField2D:
    """Test Field2D"""

    @pytest.mark.unit
    def test_shape_mismatch(self, square_grid):
        """Test a mismatched array is rejected"""
        with pytest.raises(ValidationError):
            Field2D(square_grid, np.zeros((8, 8)))

    @pytest.mark.unit
    def test_non_finite(self, square_grid):
        """Test NaN values are rejected"""
        values = np.zeros(square_grid.shape)
        values[3, 4] = np.nan
        with pytest.raises(ValidationError):
            Field2D(square_grid, values)

    @pytest.mark.unit
    def test_integrals(self, square_grid):
        """Test mass and L2 of a constant field"""
        field = Field2D(square_grid, np.full(square_grid.shape, 2.0))
        area = square_grid.length_x * square_grid.length_y
        assert field.mass() == pytest.approx(2.0 * area)
        assert field.l2() == pytest.approx(4.0 * area)
        assert field.max_abs() == 2.0

    @pytest.mark.unit
    def test_from_function(self, square_grid):
        """Test sampling a function on the mesh"""
        field = Field2D.from_function(square_grid, lambda x, y: np.sin(x) * np.cos(y))
        assert field.values[0, 0] == 0.0
        assert field.max_abs() <= 1.0


class TestResidualReport:
    """Test ResidualReport"""

    @pytest.mark.unit
    def test_round_trip_and_pass(self):
        """Test serialization and the threshold check"""
        report = ResidualReport(equation=EquationId.KDV_2P1, max_abs=1e-12, rms=1e-13,
                                location_of_max=(0.5,), mode=ResidualMode.PLANE_WAVE, samples=2048)
        assert report.validate() == []
        assert report.passed(1e-10)
        assert not report.passed(1e-12)
        assert ResidualReport.from_dict(report.to_dict()) == report

    @pytest.mark.unit
    def test_rms_above_max(self):
        """Test rms > max_abs is reported"""
        report = ResidualReport(equation=EquationId.KDV_2P1, max_abs=1.0, rms=2.0,
                                location_of_max=(0.0, 0.0), mode=ResidualMode.GRID)
        assert report.validate() == ["expected max_abs >= rms >= 0"]


class TestEvolutionConfig:
    """Test EvolutionConfig"""

    @pytest.mark.unit
    def test_rejects_gardner(self):
        """Test Gardner evolution is refused"""
        with pytest.raises(ValidationError):
            EvolutionConfig(equation=EquationId.GARDNER_2P1, dt=0.01, t_end=1.0)

    @pytest.mark.unit
    def test_rejects_bad_steps(self):
        """Test non-positive dt and negative t_end"""
        with pytest.raises(ValidationError):
            EvolutionConfig(equation=EquationId.KDV_2P1, dt=0.0, t_end=1.0)
        with pytest.raises(ValidationError):
            EvolutionConfig(equation=EquationId.KDV_2P1, dt=0.1, t_end=-1.0)

    @pytest.mark.unit
    def test_reversed(self):
        """Test reversal flips the sign of the step"""
        cfg = EvolutionConfig(equation=EquationId.KP_MOVING, dt=0.01, t_end=0.5)
        assert cfg.signed_dt == 0.01
        assert cfg.reversed().signed_dt == -0.01
        assert cfg.steps == 50

    @pytest.mark.unit
    def test_from_dict(self):
        """Test parsing with defaults and a malformed document"""
        cfg = EvolutionConfig.from_dict({"equation": "kdv21", "dt": 0.01, "t_end": 1})
        assert cfg.snapshot_every == 10
        assert cfg.dealias
        assert EvolutionConfig.from_dict(cfg.to_dict()) == cfg
        with pytest.raises(ValidationError):
            EvolutionConfig.from_dict({"equation": "kdv21"})


class TestConservedDiagnostics:
    """Test ConservedDiagnostics"""

    @pytest.mark.unit
    def test_from_field(self, plane_field):
        """Test diagnostics of a zero-mean field"""
        diagnostics = ConservedDiagnostics.from_field(1.5, plane_field)
        assert diagnostics.time == 1.5
        assert abs(diagnostics.mass) < 1e-12
        assert diagnostics.l2 > 0

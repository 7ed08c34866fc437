import json

import pytest

from nlsfigures import PanelSpec, SchemaError, render_convergence
from nlsfigures.cli import run_cli

HEADER = (
    "experiment_id,kind,gamma,tau,n_modes,t_final,seed,error_l2,runtime_ms,saturated"
)


def temporal_fixture(tmp_path, gammas=(0.8, 1.0), n_taus=4, with_mirror=True):
    """Harness-schema CSV + JSON mirror with synthetic power-law errors."""
    lines = [HEADER]
    reports = []
    for gamma in gammas:
        rows = []
        for j in range(n_taus):
            tau = 2.0 ** -(4 + j)
            err = tau**gamma
            for seed in (1, 2):
                lines.append(
                    f"exp-g{gamma},temporal-sweep,{gamma},{tau!r},64,1.0,{seed},"
                    f"{err * (1.05 if seed == 2 else 0.95)!r},1.000,false"
                )
            lines.append(
                f"exp-g{gamma},temporal-sweep,{gamma},{tau!r},64,1.0,geomean,"
                f"{err!r},1.000,false"
            )
            rows.append({"tau": tau, "error_l2": err})
        reports.append({"gamma": gamma, "fitted_slope": gamma, "rows": rows})
    csv_path = tmp_path / "r.csv"
    csv_path.write_text("\n".join(lines) + "\n")
    if with_mirror:
        (tmp_path / "r.json").write_text(json.dumps({"report": {"reports": reports}}))
    return csv_path


class TestRenderConvergence:
    def test_renders_panel_with_mirror_slopes(self, tmp_path):
        csv_path = temporal_fixture(tmp_path)
        spec = PanelSpec(
            input_csv=csv_path,
            x_column="tau",
            output=tmp_path / "fig.png",
            reference_slopes=(0.7, 1.0),
        )
        result = render_convergence(spec)
        assert result.output.exists() and result.output.stat().st_size > 0
        assert [g.gamma for g in result.groups] == [0.8, 1.0]
        for group in result.groups:
            assert group.fitted_slope == pytest.approx(group.gamma)
            assert f"slope {group.gamma:.2f}" in group.label

    def test_without_mirror_no_slope_labels(self, tmp_path):
        csv_path = temporal_fixture(tmp_path, with_mirror=False)
        result = render_convergence(
            PanelSpec(input_csv=csv_path, x_column="tau", output=tmp_path / "f.png")
        )
        for group in result.groups:
            assert group.fitted_slope is None
            assert "slope" not in group.label

    def test_empty_csv_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text(HEADER + "\n")
        with pytest.raises(SchemaError):
            render_convergence(
                PanelSpec(input_csv=path, x_column="tau", output=tmp_path / "f.png")
            )

    def test_missing_column_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("gamma,tau,seed,saturated\n1.0,0.1,1,false\n")
        with pytest.raises(SchemaError, match="error_l2"):
            render_convergence(
                PanelSpec(input_csv=path, x_column="tau", output=tmp_path / "f.png")
            )

    def test_single_row_group_renders_point(self, tmp_path):
        path = tmp_path / "single.csv"
        path.write_text(
            HEADER + "\n"
            "exp,temporal-sweep,1.0,0.0625,64,1.0,geomean,0.01,1.000,false\n"
        )
        (tmp_path / "single.json").write_text(
            json.dumps({"report": {"reports": [{"gamma": 1.0, "fitted_slope": None}]}})
        )
        result = render_convergence(
            PanelSpec(input_csv=path, x_column="tau", output=tmp_path / "f.png")
        )
        assert result.output.exists()
        assert result.groups[0].points == 1
        assert "slope" not in result.groups[0].label

    def test_spatial_panel_uses_n_modes(self, tmp_path):
        lines = [HEADER]
        for j, n in enumerate((16, 32, 64)):
            err = float(n) ** -0.8
            lines.append(
                f"exp,spatial-sweep,0.8,0.000244140625,{n},1.0,geomean,{err!r},1.0,false"
            )
        path = tmp_path / "s.csv"
        path.write_text("\n".join(lines) + "\n")
        result = render_convergence(
            PanelSpec(
                input_csv=path,
                x_column="n_modes",
                output=tmp_path / "s.png",
                reference_slopes=(0.8,),
            )
        )
        assert result.output.exists()

    def test_deterministic_output_bytes(self, tmp_path):
        csv_path = temporal_fixture(tmp_path)
        blobs = []
        for name in ("one.png", "two.png"):
            result = render_convergence(
                PanelSpec(input_csv=csv_path, x_column="tau", output=tmp_path / name)
            )
            blobs.append(result.output.read_bytes())
        assert blobs[0] == blobs[1]


def test_axis_margin_covers_data():
    import numpy as np

    from nlsfigures.render import _log_margin

    values = np.array([1e-4, 3e-3, 2e-1])
    lo, hi = _log_margin(values)
    span = np.log(values.max()) - np.log(values.min())
    assert np.log(values.min()) - np.log(lo) >= 0.05 * span - 1e-12
    assert np.log(hi) - np.log(values.max()) >= 0.05 * span - 1e-12


class TestCli:
    def test_render_command(self, tmp_path, capsys):
        csv_path = temporal_fixture(tmp_path)
        out = tmp_path / "fig.png"
        code = run_cli(
            ["render", "--input", str(csv_path), "--x", "tau",
             "--slopes", "0.4,0.7,1.0", "--out", str(out)]
        )
        assert code == 0
        assert out.exists()
        assert "wrote" in capsys.readouterr().out

    def test_empty_input_exits_nonzero(self, tmp_path, capsys):
        path = tmp_path / "empty.csv"
        path.write_text(HEADER + "\n")
        code = run_cli(
            ["render", "--input", str(path), "--x", "tau", "--out",
             str(tmp_path / "f.png")]
        )
        assert code == 2
        assert "schema error" in capsys.readouterr().err

    def test_unknown_flag_exits_two(self):
        assert run_cli(["render", "--bogus"]) == 2

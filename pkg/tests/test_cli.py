"""End-to-end command line and pipeline tests on small synthetic scenes."""

import numpy as np
import pytest

from sfctok.cli import main
from sfctok.config import PipelineConfig
from sfctok.errors import SuggestLowerT
from sfctok.io import read_token_file, save_ply
from sfctok.pipeline import run_pipeline, subsample
from sfctok.synth import make_scene

SMALL = [
    "--sample-n", "3000",
    "--tokens", "24",
    "--width", "32",
    "--svd-rank", "16",
    "--voxel-cell", "0.5",
]


@pytest.fixture(scope="module")
def scene_ply(tmp_path_factory):
    path = tmp_path_factory.mktemp("scene") / "scene.ply"
    save_ply(path, make_scene(4000, seed=1))
    return path


class TestPipeline:
    def test_small_scene_shapes(self):
        cloud = make_scene(2500, seed=2)
        cfg = PipelineConfig(
            sample_n=2500, tokens=16, width=32, svd_rank=8, voxel_cell=0.5
        )
        result = run_pipeline(cloud, cfg)
        assert result.tokens.n_tokens == 16
        assert result.tokens.width == 32
        assert np.isfinite(result.tokens.feats).all()
        assert result.n_superpoints >= 16
        assert result.edge_count > 0

    def test_deterministic(self):
        cloud = make_scene(2000, seed=3)
        cfg = PipelineConfig(
            sample_n=2000, tokens=12, width=32, svd_rank=8, voxel_cell=0.5
        )
        a = run_pipeline(cloud, cfg)
        b = run_pipeline(cloud, cfg)
        assert np.array_equal(a.tokens.feats, b.tokens.feats)
        assert np.array_equal(a.tokens.centers, b.tokens.centers)

    def test_token_budget_above_superpoints(self):
        cloud = make_scene(500, seed=4)
        cfg = PipelineConfig(
            sample_n=500, tokens=10_000, width=32, svd_rank=8, voxel_cell=0.5
        )
        with pytest.raises(Exception) as err:
            run_pipeline(cloud, cfg)
        # stage wrapper keeps the suggestion reachable
        cause = err.value
        assert isinstance(cause, SuggestLowerT) or isinstance(
            getattr(cause, "cause", None), SuggestLowerT
        )

    def test_subsample(self):
        cloud = make_scene(1000, seed=5)
        small = subsample(cloud, 300, seed=0)
        assert small.n_points == 300
        assert subsample(cloud, 5000, seed=0) is cloud
        again = subsample(cloud, 300, seed=0)
        assert np.array_equal(small.positions, again.positions)


class TestCli:
    def test_tokenize_writes_token_file(self, scene_ply, tmp_path, capsys):
        out = tmp_path / "out.tok"
        rc = main(["tokenize", str(scene_ply), "--out", str(out), *SMALL])
        assert rc == 0
        tokens = read_token_file(out)
        assert tokens.n_tokens == 24
        assert tokens.width == 32
        printed = capsys.readouterr().out
        assert "n_tokens=24" in printed
        assert f"out={out}" in printed

    def test_tokenize_byte_identical_reruns(self, scene_ply, tmp_path, monkeypatch):
        monkeypatch.delenv("SFCTOK_SEED", raising=False)
        a = tmp_path / "a.tok"
        b = tmp_path / "b.tok"
        assert main(["tokenize", str(scene_ply), "--out", str(a), *SMALL]) == 0
        assert main(["tokenize", str(scene_ply), "--out", str(b), *SMALL]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_env_seed_changes_output(self, scene_ply, tmp_path, monkeypatch):
        a = tmp_path / "a.tok"
        b = tmp_path / "b.tok"
        monkeypatch.setenv("SFCTOK_SEED", "0")
        main(["tokenize", str(scene_ply), "--out", str(a), *SMALL])
        monkeypatch.setenv("SFCTOK_SEED", "123")
        main(["tokenize", str(scene_ply), "--out", str(b), *SMALL])
        assert a.read_bytes() != b.read_bytes()

    def test_config_file_applied(self, scene_ply, tmp_path):
        cfg = tmp_path / "cfg"
        cfg.write_text(
            "sample_n=3000\ntokens=8\nwidth=32\nsvd_rank=16\nvoxel_cell=0.5\n"
        )
        out = tmp_path / "o.tok"
        rc = main(["tokenize", str(scene_ply), "--config", str(cfg),
                   "--out", str(out)])
        assert rc == 0
        assert read_token_file(out).n_tokens == 8

    def test_flag_overrides_config_file(self, scene_ply, tmp_path):
        cfg = tmp_path / "cfg"
        cfg.write_text(
            "sample_n=3000\ntokens=8\nwidth=32\nsvd_rank=16\nvoxel_cell=0.5\n"
        )
        out = tmp_path / "o.tok"
        rc = main(["tokenize", str(scene_ply), "--config", str(cfg),
                   "--tokens", "12", "--out", str(out)])
        assert rc == 0
        assert read_token_file(out).n_tokens == 12

    def test_oversized_budget_fails_cleanly(self, scene_ply, tmp_path, capsys):
        out = tmp_path / "o.tok"
        rc = main(["tokenize", str(scene_ply), "--out", str(out),
                   "--sample-n", "3000", "--tokens", "100000",
                   "--width", "32", "--voxel-cell", "0.5"])
        assert rc == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "segment" in err or "lower" in err

    def test_external_labels(self, tmp_path, capsys):
        cloud = make_scene(1500, seed=6)
        ply = tmp_path / "s.ply"
        save_ply(ply, cloud)
        # labels by x-coordinate bands, aligned with the full cloud
        bands = np.digitize(cloud.positions[:, 0], np.linspace(-4, 4, 40))
        lab = tmp_path / "lab.txt"
        lab.write_text("\n".join(str(int(v)) for v in bands) + "\n")
        out = tmp_path / "o.tok"
        rc = main(["tokenize", str(ply), "--labels", str(lab), "--out", str(out),
                   "--sample-n", "1500", "--tokens", "8", "--width", "32",
                   "--svd-rank", "8"])
        assert rc == 0
        assert read_token_file(out).n_tokens == 8

    def test_graph_dump(self, scene_ply, tmp_path, capsys):
        out = tmp_path / "edges.csv"
        rc = main(["graph-dump", str(scene_ply), "--out", str(out),
                   "--sample-n", "3000", "--voxel-cell", "0.5"])
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "src,dst,dist2,votes"
        assert len(lines) > 1
        src, dst, d2, votes = lines[1].split(",")
        assert int(src) >= 0 and int(dst) >= 0
        assert float(d2) >= 0 and int(votes) >= 1

    def test_inspect(self, scene_ply, tmp_path, capsys):
        out = tmp_path / "o.tok"
        main(["tokenize", str(scene_ply), "--out", str(out), *SMALL])
        capsys.readouterr()
        rc = main(["inspect", str(out)])
        assert rc == 0
        printed = capsys.readouterr().out
        assert "magic=FAS3" in printed
        assert "n_tokens=24" in printed
        assert "width=32" in printed

    def test_bench_smoke(self, tmp_path, capsys):
        out = tmp_path / "bench.csv"
        rc = main(["bench", "--sizes", "1000,2000", "--trials", "1",
                   "--oracle-cap", "2000", "--out", str(out),
                   "--voxel-cell", "0.5"])
        assert rc == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) >= 3
        printed = capsys.readouterr().out
        assert "build_slope=" in printed

    def test_missing_file_reports_error(self, tmp_path, capsys):
        rc = main(["inspect", str(tmp_path / "nope.tok")])
        assert rc != 0 or capsys.readouterr().err

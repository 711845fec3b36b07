import pytest

from iluscan import (
    CliConfig,
    ConfigError,
    EngineMode,
    PipelineConfig,
    SegmentationMode,
    load_cli_config,
)


class TestPipelineConfigDefaults:
    def test_thresholds(self):
        cfg = PipelineConfig()
        assert cfg.det_score_threshold == 0.5
        assert cfg.det_nms_iou == 0.5
        assert cfg.aspect_min_ratio == 1.5
        assert cfg.text_score_threshold == 0.5
        assert cfg.text_nms_iou == 0.4
        assert cfg.ocr_min_confidence == 0.99

    def test_voting_window(self):
        cfg = PipelineConfig()
        assert cfg.window_n == 10
        assert cfg.require_k == 3

    def test_ocr_settings(self):
        cfg = PipelineConfig()
        assert cfg.ocr.language == "eng"
        assert cfg.ocr.engine_mode is EngineMode.LSTM_ONLY
        assert cfg.ocr.segmentation_mode is SegmentationMode.SINGLE_LINE

    def test_pattern(self):
        cfg = PipelineConfig()
        assert cfg.ilu_pattern.prefixes == frozenset({"SJSB", "SCSB"})
        assert (cfg.ilu_pattern.digits_min, cfg.ilu_pattern.digits_max) == (4, 7)

    def test_invariants(self):
        with pytest.raises(ValueError):
            PipelineConfig(det_score_threshold=1.2)
        with pytest.raises(ValueError):
            PipelineConfig(require_k=11, window_n=10)
        with pytest.raises(ValueError):
            PipelineConfig(aspect_min_ratio=0.0)
        with pytest.raises(ValueError):
            PipelineConfig(max_text_input_side=10)


class TestLoadCliConfig:
    def test_missing_file(self, tmp_path):
        missing = tmp_path / "nope.yaml"
        with pytest.raises(ConfigError, match="config file not found"):
            load_cli_config(missing)

    def test_empty_file_gives_defaults(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("")
        cfg = load_cli_config(path)
        assert isinstance(cfg, CliConfig)
        assert cfg.pipeline == PipelineConfig()
        assert cfg.backends["detector"]["kind"] == "stub"
        assert cfg.backends["text"]["kind"] == "full-crop"
        assert cfg.backends["ocr"]["kind"] == "stub"

    def test_pipeline_overrides(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text(
            "pipeline:\n  det_score_threshold: 0.7\n  window_n: 5\n  require_k: 2\n"
        )
        cfg = load_cli_config(path)
        assert cfg.pipeline.det_score_threshold == 0.7
        assert cfg.pipeline.window_n == 5
        assert cfg.pipeline.require_k == 2

    def test_ocr_section(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("ocr:\n  language: deu\n  padding_ratio: 0.1\n")
        cfg = load_cli_config(path)
        assert cfg.pipeline.ocr.language == "deu"
        assert cfg.pipeline.ocr.padding_ratio == 0.1

    def test_ilu_section(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("ilu:\n  prefixes: [AAAA]\n  digits_min: 5\n  digits_max: 6\n")
        cfg = load_cli_config(path)
        assert cfg.pipeline.ilu_pattern.prefixes == frozenset({"AAAA"})
        assert cfg.pipeline.ilu_pattern.digits_min == 5

    def test_unknown_top_level_key(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("pipelin:\n  det_score_threshold: 0.7\n")
        with pytest.raises(ConfigError, match="pipelin"):
            load_cli_config(path)

    def test_unknown_pipeline_key(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("pipeline:\n  detscore: 0.7\n")
        with pytest.raises(ConfigError, match="detscore"):
            load_cli_config(path)

    def test_unknown_backend_option(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("backends:\n  detector:\n    kind: stub\n    extra: 1\n")
        with pytest.raises(ConfigError, match="extra"):
            load_cli_config(path)

    def test_unknown_backend_kind(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("backends:\n  detector:\n    kind: banana\n")
        with pytest.raises(ConfigError, match="banana"):
            load_cli_config(path)

    def test_model_backends_require_model(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("backends:\n  detector:\n    kind: opencv-ssd\n")
        with pytest.raises(ConfigError, match="model"):
            load_cli_config(path)

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("pipeline: [unclosed\n")
        with pytest.raises(ConfigError, match="YAML"):
            load_cli_config(path)

    def test_invariant_violation_reported_as_config_error(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("pipeline:\n  require_k: 11\n")
        with pytest.raises(ConfigError):
            load_cli_config(path)

    def test_non_numeric_value(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("pipeline:\n  det_score_threshold: high\n")
        with pytest.raises(ConfigError, match="det_score_threshold"):
            load_cli_config(path)

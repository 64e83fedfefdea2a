import pytest

from app.core.config import Settings, check_keys, layered, load_config_file, pick
from app.core.errors import InvalidInputError
from app.models.training import SpsaConfig, TrainConfig


def test_settings_read_environment(monkeypatch, tmp_path):
    monkeypatch.setenv("QGAN_OUT_DIR", str(tmp_path))
    monkeypatch.setenv("QGAN_JOBS", "3")
    s = Settings()
    assert s.out_dir == str(tmp_path)
    assert s.jobs == 3


def test_settings_fields():
    assert set(Settings.model_fields) == {"out_dir", "jobs", "log_level", "seed", "log_json", "cors_allow_origins"}


def test_config_file_overrides_defaults_and_flags_override_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# scaled protocol\nEPOCHS=300\ngen_lr=0.03\nc0=0.2\n", encoding="utf-8")
    values = load_config_file(str(path))
    check_keys(values, TrainConfig, SpsaConfig)
    cfg = layered(TrainConfig, pick(TrainConfig, values), {"epochs": 5, "shots": None})
    assert cfg.epochs == 5
    assert cfg.gen_lr == 0.03
    assert cfg.shots == 1024
    assert layered(SpsaConfig, pick(SpsaConfig, values), {}).c0 == 0.2


def test_unknown_keys_rejected(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("epochs=3\nlearning_rate=0.1\n", encoding="utf-8")
    with pytest.raises(InvalidInputError, match="learning_rate"):
        check_keys(load_config_file(str(path)), TrainConfig, SpsaConfig)
    with pytest.raises(InvalidInputError):
        layered(TrainConfig, {"learning_rate": "0.1"}, {})


def test_invalid_values_rejected():
    with pytest.raises(InvalidInputError):
        layered(TrainConfig, {"label_true": "1.5"}, {})


def test_missing_config_file():
    with pytest.raises(InvalidInputError):
        load_config_file("/nonexistent/run.cfg")
    assert load_config_file(None) == {}


def test_config_file_sets_gradient_history(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("momentum=0\n", encoding="utf-8")
    values = load_config_file(str(path))
    check_keys(values, TrainConfig, SpsaConfig)
    assert layered(SpsaConfig, pick(SpsaConfig, values), {}).momentum == 0.0

from pathlib import Path

import pytest

from dicomvault.config import ServerConfig, load_config


def test_defaults():
    config = load_config(env={})
    assert config.port == 8080
    assert config.rbac_mode is True
    assert config.token_ttl_seconds == 1800.0


def test_file_values(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("port: 9000\nrbac_mode: false\ndata_dir: /tmp/vault\n"
                   "admin_password: hunter2\n")
    config = load_config(cfg, env={})
    assert config.port == 9000
    assert config.rbac_mode is False
    assert config.data_dir == Path("/tmp/vault")
    assert config.admin_password == "hunter2"


def test_env_overrides_file(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("port: 9000\nrbac_mode: false\n")
    config = load_config(cfg, env={"DICOMVAULT_PORT": "9100",
                                   "DICOMVAULT_RBAC_MODE": "on",
                                   "DICOMVAULT_TOKEN_TTL_SECONDS": "60"})
    assert config.port == 9100
    assert config.rbac_mode is True
    assert config.token_ttl_seconds == 60.0


def test_unknown_keys_rejected(tmp_path):
    cfg = tmp_path / "cfg.yaml"
    cfg.write_text("prot: 1\n")
    with pytest.raises(ValueError):
        load_config(cfg, env={})


def test_bad_boolean_rejected(tmp_path):
    with pytest.raises(ValueError):
        load_config(env={"DICOMVAULT_RBAC_MODE": "maybe"})


def test_server_config_is_plain_dataclass():
    config = ServerConfig(port=1234)
    assert config.port == 1234

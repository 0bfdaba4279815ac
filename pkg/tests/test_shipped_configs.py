"""Every shipped acceptance config must run green through the CLI."""

import json
from pathlib import Path

import pytest

from morselab import cli

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs" / "acceptance"
CONFIGS = sorted(CONFIG_DIR.glob("*.json"))


def test_configs_are_shipped():
    assert len(CONFIGS) >= 9


@pytest.mark.parametrize("config_path", CONFIGS, ids=lambda p: p.stem)
def test_shipped_config_passes(config_path, tmp_path):
    config = json.loads(config_path.read_text())
    status = cli.run(config, tmp_path / config_path.stem)
    summary = json.loads((tmp_path / config_path.stem / "summary.json").read_text())
    assert status == 0, summary.get("failed_assertions") or summary.get("error")
    assert summary["failed_assertions"] == []

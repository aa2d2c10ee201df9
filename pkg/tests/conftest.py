"""共享夹具"""

from __future__ import annotations

import pytest

from oddkh.corpus import bundled_corpus, diagram_from_record
from oddkh.diagram import PlanarDiagram
from oddkh.utils import EngineConfig


@pytest.fixture(scope="session")
def corpus() -> dict[str, PlanarDiagram]:
    return {
        name: diagram_from_record(name, value)
        for name, value in bundled_corpus().items()
    }


@pytest.fixture
def hopf(corpus) -> PlanarDiagram:
    return corpus["hopf"]


@pytest.fixture
def trefoil(corpus) -> PlanarDiagram:
    return corpus["trefoil_right"]


@pytest.fixture
def unknot(corpus) -> PlanarDiagram:
    return corpus["unknot"]


@pytest.fixture
def config(tmp_path, monkeypatch) -> EngineConfig:
    """不受环境变量与仓库配置文件影响的默认配置"""
    for var in (
        "ODDKH_MAX_CROSSINGS", "ODDKH_CUBE_LIMIT", "ODDKH_WORKERS",
        "ODDKH_MEMORY_MB", "ODDKH_TIME_LIMIT",
    ):
        monkeypatch.delenv(var, raising=False)
    return EngineConfig(config_path=str(tmp_path / "missing.yaml"))

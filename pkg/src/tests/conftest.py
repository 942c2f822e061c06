from __future__ import annotations

import pytest

from src.service.geodesic.domain.tighten import FlatGeodesic
from src.service.geodesic.service import GeodesicService
from src.service.surface.domain.surface_core import HalfTranslationSurface
from src.service.surface.domain.tracing import SurfacePoint
from src.service.surface.service import SurfaceService


@pytest.fixture(autouse=True)
def _log_file(tmp_path_factory: pytest.TempPathFactory, monkeypatch: pytest.MonkeyPatch):
    log_dir = tmp_path_factory.getbasetemp() / "logs"
    monkeypatch.setenv("APP_LOG_FILE_PATH", str(log_dir / "app.log"))


@pytest.fixture(scope="session")
def torus() -> HalfTranslationSurface:
    return SurfaceService.load("torus")


@pytest.fixture(scope="session")
def l3() -> HalfTranslationSurface:
    return SurfaceService.load("l3")


@pytest.fixture(scope="session")
def octagon() -> HalfTranslationSurface:
    return SurfaceService.load("octagon")


@pytest.fixture(scope="session")
def q22() -> HalfTranslationSurface:
    return SurfaceService.load("q22")


@pytest.fixture(scope="session")
def q1111() -> HalfTranslationSurface:
    return SurfaceService.load("q1111")


def geodesic_of(surface: HalfTranslationSurface, name: str) -> FlatGeodesic:
    """Tightened fixture curve on `surface`."""
    return GeodesicService.tighten(surface, GeodesicService.load_curve(surface, name))


def two_vertical_cylinders(surface: HalfTranslationSurface) -> FlatGeodesic:
    """Vertical core of square 0, then of square 1 and back: tightens onto shared sides."""
    start = SurfacePoint(triangle=0, x=0.5, y=0.3)
    path = [[0.0, 2.0], [1.0, 0.0], [0.0, 2.0], [-1.0, 0.0]]
    return GeodesicService.tighten(surface, GeodesicService.curve_of_path(surface, start, path))

import numpy as np
import pytest

from pathmetrics.config import Config, VSA_CORNERS
from pathmetrics.metrics import nad
from pathmetrics.tensorfile import Tensor2D


class TestOverrides:
    def test_scalar_coercion(self):
        cfg = Config()
        cfg.override("pitch.floor_hz", "75")
        cfg.override("beam.width", "32")
        cfg.override("cpp.frame_averaged", "true")
        assert cfg.pitch.floor_hz == 75.0
        assert cfg.beam.width == 32
        assert cfg.cpp.frame_averaged is True

    def test_unknown_key(self):
        with pytest.raises(KeyError):
            Config().override("nope.key", "1")
        with pytest.raises(KeyError):
            Config().override("pitch.nope", "1")

    def test_vsa_corner_language_override(self):
        cfg = Config()
        cfg.override("vsa.corners.nl", "[[300, 2200], [700, 1200], [320, 840]]")
        cfg.override("vsa.language", "nl")
        assert cfg.vsa.corner_points() == [[300, 2200], [700, 1200], [320, 840]]
        # Other languages keep their defaults.
        cfg.override("vsa.language", "en")
        assert cfg.vsa.corner_points() == VSA_CORNERS["en"]

    def test_bad_json_for_dict_override(self):
        with pytest.raises(KeyError, match="JSON"):
            Config().override("vsa.corners.nl", "not-json")

    def test_wada_table_path(self):
        cfg = Config()
        cfg.override("wada.table_path", "/tmp/custom.json")
        assert cfg.wada.table_path == "/tmp/custom.json"


def test_nad_euclidean_distance_option():
    rng = np.random.default_rng(1)
    a = Tensor2D(rng.normal(size=(4, 3)).astype(np.float32))
    b = Tensor2D(rng.normal(size=(4, 3)).astype(np.float32))
    cos = nad(a, [b], distance="cosine")
    euc = nad(a, [b], distance="euclidean")
    assert cos != euc
    assert nad(a, [a], distance="euclidean") == pytest.approx(0.0, abs=1e-7)
    with pytest.raises(ValueError, match="distance"):
        nad(a, [b], distance="manhattan")


def test_workers_env_fallback(monkeypatch):
    from pathmetrics.cli import _workers_default

    monkeypatch.delenv("PATHMETRICS_WORKERS", raising=False)
    assert _workers_default() == 1
    monkeypatch.setenv("PATHMETRICS_WORKERS", "6")
    assert _workers_default() == 6
    monkeypatch.setenv("PATHMETRICS_WORKERS", "junk")
    assert _workers_default() == 1

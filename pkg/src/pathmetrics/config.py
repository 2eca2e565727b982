"""Run configuration with dotted-path overrides.

Defaults follow the conventions used throughout the package: pitch search
range widened for pathological voices, beam fusion weights alpha=0.5 /
beta=1.5, Sakoe-Chiba radius at 25% of the longer sequence. Corner-vowel
formant references are maintainer-curated values from the standard
vowel-inventory studies for each language (means over adult speakers,
rounded); they are configuration data, not measurements made here.
"""

import copy
from dataclasses import dataclass, field

# (F1 Hz, F2 Hz) per corner vowel, keyed by language code.
VSA_CORNERS = {
    "en": {"i": (280.0, 2250.0), "ae": (660.0, 1720.0), "a": (710.0, 1100.0), "u": (310.0, 870.0)},
    "nl": {"i": (294.0, 2210.0), "a": (695.0, 1200.0), "u": (320.0, 840.0)},
    "it": {"i": (290.0, 2230.0), "a": (700.0, 1300.0), "u": (310.0, 750.0)},
    "es": {"i": (300.0, 2200.0), "a": (690.0, 1300.0), "u": (320.0, 800.0)},
}


@dataclass
class PitchConfig:
    floor_hz: float = 60.0
    ceil_hz: float = 400.0
    voicing_threshold: float = 0.45


@dataclass
class BeamConfig:
    width: int = 100
    alpha: float = 0.5
    beta: float = 1.5


@dataclass
class DtwConfig:
    radius_frac: float = 0.25


@dataclass
class CppConfig:
    frame_averaged: bool = False


@dataclass
class NadConfig:
    distance: str = "cosine"  # or "euclidean"


@dataclass
class VsaConfig:
    language: str = "en"
    corners: dict = None  # per-language overrides, merged over the defaults

    def corner_points(self):
        table = dict(VSA_CORNERS)
        if self.corners:
            table.update(self.corners)
        return table[self.language]


@dataclass
class WadaConfig:
    table_path: str = None  # None -> bundled table


@dataclass
class Config:
    pitch: PitchConfig = field(default_factory=PitchConfig)
    beam: BeamConfig = field(default_factory=BeamConfig)
    dtw: DtwConfig = field(default_factory=DtwConfig)
    cpp: CppConfig = field(default_factory=CppConfig)
    nad: NadConfig = field(default_factory=NadConfig)
    vsa: VsaConfig = field(default_factory=VsaConfig)
    wada: WadaConfig = field(default_factory=WadaConfig)

    def copy(self):
        return copy.deepcopy(self)

    def override(self, dotted, value):
        """Apply one dotted-path override, coercing to the field type.

        Two-level paths set dataclass fields (``pitch.floor_hz=75``); a third
        level reaches into dict-valued fields, with the value parsed as JSON
        (``vsa.corners.nl=[[300,2200],[700,1200],[320,840]]``).
        """
        import json

        section, _, rest = dotted.partition(".")
        key, _, subkey = rest.partition(".")
        if not key or not hasattr(self, section):
            raise KeyError(f"unknown config key {dotted!r}")
        obj = getattr(self, section)
        if not hasattr(obj, key):
            raise KeyError(f"unknown config key {dotted!r}")
        current = getattr(obj, key)
        if subkey:
            table = dict(current) if current is not None else {}
            try:
                table[subkey] = json.loads(value) if isinstance(value, str) else value
            except json.JSONDecodeError as e:
                raise KeyError(f"override {dotted!r}: value is not valid JSON ({e})")
            setattr(obj, key, table)
            return self
        if isinstance(current, bool):
            value = str(value).lower() in ("1", "true", "yes", "on")
        elif isinstance(current, int):
            value = int(value)
        elif isinstance(current, float):
            value = float(value)
        setattr(obj, key, value)
        return self

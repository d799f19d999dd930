"""Access to the versioned empirical constants in ``calibration.json``."""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=1)
def load() -> dict:
    return json.loads(resources.files(__package__).joinpath("calibration.json").read_text())


def get(name: str):
    return load()["constants"][name]


def advrand_scale(k: int) -> float:
    """Calibrated ``c_k`` in the AdvRand target ``t = c_k * sqrt(m / D)``."""
    table = get("advrand_t_scale")
    return float(table.get(str(k), table["default"]))

import math

import numpy as np
import pytest

from ifsdim.ifs_core import IFS, Similarity

SPECS = __import__("pathlib").Path(__file__).resolve().parent.parent / "specs"


def sierpinski_ifs() -> IFS:
    eye = np.eye(2)
    return IFS([
        Similarity(0.5, eye, [0.0, 0.0]),
        Similarity(0.5, eye, [0.5, 0.0]),
        Similarity(0.5, eye, [0.25, 0.5]),
    ])


def cantor_ifs() -> IFS:
    return IFS([Similarity(1 / 3, np.eye(1), [0.0]), Similarity(1 / 3, np.eye(1), [2 / 3])])


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def random_ifs(rng: np.random.Generator, k: int, dim: int = 2, c_range=(0.1, 0.7)) -> IFS:
    maps = []
    for _ in range(k):
        q, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
        maps.append(Similarity(rng.uniform(*c_range), q, rng.uniform(-1, 1, size=dim)))
    return IFS(maps)


@pytest.fixture
def sierpinski():
    return sierpinski_ifs()


@pytest.fixture
def cantor():
    return cantor_ifs()


@pytest.fixture
def specs_dir():
    return SPECS

"""Synthetic stand-ins shaped like the benchmark data sets.

Each generator mimics a benchmark table row's dimensions: a block of
informative features carries a class shift, the rest are noise, and a
small fraction of labels is flipped so ensembles stay imperfect.
"""
import numpy as np

from margin_forge.dataset_io import Dataset


def _cloud(name, n, p, informative, shift, noise, flip, seed):
    rng = np.random.default_rng(seed)
    y = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    rng.shuffle(y)
    x = rng.normal(size=(n, p))
    x[:, :informative] += shift * y[:, None]
    x += noise * rng.normal(size=(n, p))
    y = np.where(rng.random(n) < flip, -y, y)
    return Dataset(name, x, y)


def sonar_like(seed=0):
    return _cloud("sonar-like", 208, 60, informative=8, shift=0.55,
                  noise=0.4, flip=0.07, seed=seed)


def ionosphere_like(seed=0):
    return _cloud("ionosphere-like", 351, 34, informative=6, shift=0.7,
                  noise=0.4, flip=0.05, seed=seed)


def pima_like(seed=0):
    return _cloud("pima-like", 768, 8, informative=3, shift=0.5,
                  noise=0.5, flip=0.12, seed=seed)

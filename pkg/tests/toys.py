"""Small hand-built meta-datasets for tests."""
from lcarena.curves import P_GRID, SizeCurveTriplet, TimeCurve
from lcarena.metadata import AlgoMeta, DatasetMeta, MetaDataset


def dmeta(name, T=100.0, **extra):
    return DatasetMeta(name, "binary", "auc", T, 100, 10, False, dict(extra))


def algos(m):
    return tuple(AlgoMeta(j, "KNN", {"k": j}) for j in range(m))


def r1_dataset(curves, T=100.0, names=("d0",)):
    """``curves[j] = (times, valid, test)``, shared by every dataset in ``names``."""
    cmap = {}
    for n in names:
        for j, (t, v, s) in enumerate(curves):
            cmap[(n, j)] = (TimeCurve(t, v), TimeCurve(t, s))
    return MetaDataset("R1", tuple(dmeta(n, T) for n in names), algos(len(curves)), cmap, {})


def triplet(valid, test=None, cost=None, train=None, p=P_GRID):
    n = len(p)
    valid = list(valid) if hasattr(valid, "__len__") else [valid] * n
    test = valid if test is None else (list(test) if hasattr(test, "__len__") else [test] * n)
    cost = [1.0] * n if cost is None else (list(cost) if hasattr(cost, "__len__") else [cost] * n)
    train = valid if train is None else train
    return SizeCurveTriplet(p, cost, train, valid, test)


def r2_dataset(triplets, T=100.0, names=("d0",), extras=None):
    cmap = {}
    for n in names:
        for j, c in enumerate(triplets(n) if callable(triplets) else triplets):
            cmap[(n, j)] = c
    m = len(triplets(names[0]) if callable(triplets) else triplets)
    metas = tuple(dmeta(n, T, **((extras or {}).get(n, {}))) for n in names)
    return MetaDataset("R2", metas, algos(m), {}, cmap)

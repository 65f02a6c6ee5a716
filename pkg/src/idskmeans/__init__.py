"""k-means seeded by a restarting downhill simplex search, with baselines and validity indices."""

from .dataset import LabeledDataset, bounding_box, load_builtin, load_csv, standardize
from .kmeans import Clustering, assign, forgy_init, kmeans, lloyd, update_centroids
from .optimizers import (
    DsConfig,
    Objective,
    OptimizerResult,
    RsConfig,
    Simplex,
    downhill_simplex,
    improved_downhill_simplex,
    init_simplex,
    nelder_mead_step,
    random_search,
    simplex_diameter,
)
from .seeding import SeedingConfig, decode, encode, seeded_kmeans, seeding_objective, simplex_seeded_kmeans
from .validity import accuracy, confusion, dunn_index, jagota_index

__version__ = "0.1.0"

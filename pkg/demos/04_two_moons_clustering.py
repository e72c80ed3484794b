"""
Clustering two moons from their codes
=====================================

Codes learned on the two moons share atoms only between nearby points, so
the Gram matrix of the codes is a sparse, local similarity graph. Spectral
clustering on that graph separates the arcs, which plain k-means on the raw
coordinates cannot do.
"""

import numpy as np

from simplexcode.clustering import (
    clustering_accuracy,
    kmeans,
    similarity_graph,
    spectral_cluster,
)
from simplexcode.datasets import gen_two_moons
from simplexcode.kds import TrainConfig, train

data = gen_two_moons(n=1000, sigma=0.05, seed=0)
report = train(data, TrainConfig(seed=0), m=16)

W = similarity_graph(report.codes)
print(f"similarity graph density {np.mean(W > 0):.3f}")

labels = spectral_cluster(report.codes, k=2, seed=0)
baseline = kmeans(data.points.T, k=2, seed=0)
print(f"KDS accuracy {clustering_accuracy(labels, data.labels):.3f}")
print(f"KM  accuracy {clustering_accuracy(baseline, data.labels):.3f}")

# which atoms each moon uses
for k in range(2):
    share = report.codes[:, data.labels == k].mean(axis=1)
    print(f"moon {k}: atoms {np.flatnonzero(share > 0.01).tolist()}")

import numpy as np

from src.logreg_boundary import boundary_diagnostic
from src.logreg_boundary import Dataset
from src.logreg_boundary import envelope_of_lines
from src.logreg_boundary import LineFamily
from src.logreg_boundary import suffstat_polytope_2d


family = LineFamily([(1, 1), (2, 4), (3, 9), (4, -1)])
envelope = envelope_of_lines(family)
print('Upper envelope:', envelope.upper)
print('Lower envelope:', envelope.lower)
print('Redundant lines:', sorted(envelope.redundant))

X = np.array([[1, -1], [1, -1], [1, 1], [1, 1]], dtype=float)
print('Sufficient statistic polytope:\n', suffstat_polytope_2d(X).vertices)
print(boundary_diagnostic(Dataset(X, [1, 0, 0, 1])))

x = np.arange(60) - 29.5
design = np.column_stack((np.ones(60), x))
for blocks in (15, 8, 3, 1, 0):
    side = 30 - 2 * blocks
    t = np.concatenate((np.zeros(side, dtype=int), np.tile([0, 1, 1, 0], blocks), np.ones(side, dtype=int)))
    report = boundary_diagnostic(Dataset(design, t))
    print(f'\nMixed blocks: {blocks}')
    print(report)

"""Is sentence likelihood predictive of endpoint similarity and connectivity?

Samples 2-hop paths, scores each three ways (LM log-probability of the
verbalized sentence, endpoint name-embedding similarity, direct endpoint
adjacency) and reports Spearman rank correlations.
"""

import numpy as np

from hinfill import hypothesis_study, train_builtin_lm
from hinfill.fixture import build_hypothesis_fixture

hin = build_hypothesis_fixture()
lm = train_builtin_lm(hin, order=2, smoothing=0.1, dim=16, epochs=2, seed=3)
report = hypothesis_study(hin, lm, n_paths=60, seed=11)

plm = np.array(report.plm_scores)
conn = np.array(report.connectivity)
print(f"{len(plm)} distinct 2-hop paths "
      f"({int(conn.sum())} with directly connected endpoints)")
print(f"mean LM score | connected:     {plm[conn == 1].mean():8.3f}")
print(f"mean LM score | not connected: {plm[conn == 0].mean():8.3f}")
print(f"\nspearman(LM score, name similarity): {report.spearman_plm_name:.3f}")
print(f"spearman(LM score, connectivity):    {report.spearman_plm_connectivity:.3f}")

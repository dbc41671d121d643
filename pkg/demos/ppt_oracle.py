"""
Cross-checking with partial transposes
======================================

The partial transpose test does not use the quadratic system at all.  A
negative eigenvalue proves entanglement; a pass only proves consistency.
"""

import numpy as np

from rank2sep import DensityMatrix, PartyShape, decide, ppt_check, rank_two_extract
from rank2sep.samples import ghz_orthogonal, product_mixture

rng = np.random.default_rng(2)
shape = PartyShape(3, 3)

for name, rho in [
    ("product mixture", product_mixture(shape, rng)),
    ("GHZ mixture, p=0.3", DensityMatrix(shape, ghz_orthogonal(shape, 0.3, rng).density())),
]:
    report = ppt_check(rho)
    verdict = decide(rank_two_extract(rho))
    print(f"{name}: criterion says {verdict.decision.value}, PPT "
          f"{'passes' if report.passed else 'fails'}")
    for cut, value in report.per_bipartition:
        print(f"    min eigenvalue on {cut}: {value:+.3e}")

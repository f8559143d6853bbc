"""Symmetric-cone feasibility solvers built on multiplicative weights.

Modules:
    cones      closed-form Jordan algebra arithmetic (orthant / second-order)
    mwu        the multiplicative-weights learner over the trace-one slice
    meta       alpha-feasibility testing and the adaptive optimization search
    ses        smallest enclosing sphere solver
    svm        hard-margin SVM / polytope distance solver
    baselines  independent reference solvers used for verification
    instances  instance file formats and random generators
    bench      run / verify / sweep drivers behind the CLI
"""

from . import baselines, bench, cones, instances, meta, mwu, ses, svm  # noqa: F401

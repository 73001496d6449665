"""Experiment suites; importing this package registers every experiment."""

from cbrw.experiments.suites import (  # noqa: F401
    bd_finite,
    entering,
    green_ratio,
    halfline,
    mt1,
    mt2,
    mt5,
    qr,
    reduction,
)

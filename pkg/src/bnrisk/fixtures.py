"""Published reference values bundled for fixture tests and demo models.

Holds the marginal class percentages of the study population, the prior /
posterior sleep-duration tables used as golden fixtures, and helpers that
assemble a demo model from them. Percentages are carried verbatim as
published, so each vector sums to 1 only within rounding (0.0005); callers
that need exact distributions renormalize.

The sleep-duration prior row (.1024/.8963/.0011) and the population marginal
row (10.88/89.01/0.11) disagree slightly in the source; both are carried,
keyed by table, rather than reconciled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Dag, NetworkSchema, reference_crc_network


@dataclass(frozen=True)
class MarginalTable:
    """Per-variable marginal probability vectors (state order = schema order)."""

    marginals: dict[str, tuple[float, ...]]

    def vector(self, name: str) -> np.ndarray:
        return np.array(self.marginals[name], dtype=np.float64)

    def normalized(self, name: str) -> np.ndarray:
        v = self.vector(name)
        return v / v.sum()


# Percentage of observations at each class, as published (divided by 100).
POPULATION_MARGINALS = MarginalTable(
    {
        "v_sex": (0.3068, 0.6932),
        "v_age": (0.2121, 0.3802, 0.2903, 0.1173),
        "v_SES": (0.2393, 0.6197, 0.1410),
        "v_BMI": (0.0110, 0.4127, 0.4067, 0.1696),
        "v_PA": (0.4721, 0.5279),
        "v_SD": (0.1088, 0.8901, 0.0011),
        "v_alc": (0.9505, 0.0495),
        "v_smok": (0.4990, 0.3016, 0.1994),
        "v_anx": (0.0270, 0.9730),
        "v_dep": (0.0047, 0.9953),
        "v_hypten": (0.1505, 0.8495),
        "v_hypchol": (0.5132, 0.4868),
        "v_diab": (0.0363, 0.9637),
        "v_CRC": (0.0007, 0.9993),
    }
)

#: Relative prior weight used for the published fit: patients / 10000.
PUBLISHED_ALPHA = 31.69

#: Prior mean for sleep duration (short, normal, excessive); identical for
#: every sex/age cell by construction.
SD_PRIOR_MEAN = (0.1024, 0.8963, 0.0011)

#: Column order for the SD golden tables below.
SD_CELLS = (
    ("male", "(24,34]"),
    ("female", "(24,34]"),
    ("male", "(34,44]"),
    ("female", "(34,44]"),
    ("male", "(44,54]"),
    ("female", "(44,54]"),
    ("male", "(54,64]"),
    ("female", "(54,64]"),
)

#: Posterior mean of SD given sex and age after the first year of data,
#: rows = (short, normal, excessive), columns = SD_CELLS.
SD_POSTERIOR_MEAN_2012 = (
    (0.0600, 0.0711, 0.0897, 0.1039, 0.1211, 0.1581, 0.1386, 0.2256),
    (0.9384, 0.9264, 0.9092, 0.8952, 0.8778, 0.8407, 0.8604, 0.7737),
    (0.0016, 0.0025, 0.0011, 0.0009, 0.0012, 0.0012, 0.0010, 0.0007),
)

#: 0.9 posterior interval for the SD probabilities after the first year,
#: same layout as SD_POSTERIOR_MEAN_2012, entries (lo, hi).
SD_INTERVAL_2012 = (
    (
        (0.0583, 0.0617), (0.0686, 0.0737), (0.0881, 0.0914), (0.1013, 0.1064),
        (0.1189, 0.1232), (0.1543, 0.1619), (0.1347, 0.1425), (0.2175, 0.2338),
    ),
    (
        (0.9367, 0.9401), (0.9238, 0.9290), (0.9076, 0.9108), (0.8926, 0.8978),
        (0.8756, 0.8800), (0.8369, 0.8445), (0.8565, 0.8643), (0.7654, 0.7818),
    ),
    (
        (0.0013, 0.0019), (0.0020, 0.0030), (0.0009, 0.0013), (0.0007, 0.0012),
        (0.0009, 0.0014), (0.0008, 0.0015), (0.0007, 0.0014), (0.0003, 0.0013),
    ),
)

#: Year-by-year evolution for a man aged (24,34]: state -> list of
#: (mean, lo, hi) for 2012..2015; the prior column is SD_PRIOR_MEAN.
SD_EVOLUTION_MAN_24_34 = {
    "short": (
        (0.0600, 0.0583, 0.0617),
        (0.0600, 0.0581, 0.0613),
        (0.0595, 0.0579, 0.0612),
        (0.0608, 0.0591, 0.0626),
    ),
    "normal": (
        (0.9384, 0.9367, 0.9401),
        (0.9388, 0.9372, 0.9404),
        (0.9389, 0.9373, 0.9406),
        (0.9378, 0.9360, 0.9396),
    ),
    "excessive": (
        (0.0016, 0.0013, 0.0019),
        (0.0015, 0.0013, 0.0018),
        (0.0015, 0.0013, 0.0018),
        (0.0013, 0.0011, 0.0016),
    ),
}

#: Published confusion tables (tn, fp, fn, tp) used by the validation suite.
CONFUSION_CRC = (243326, 96163, 70, 148)
CONFUSION_DIABETES = (249937, 78361, 3118, 8291)


def paper_fixtures() -> tuple[MarginalTable, tuple[NetworkSchema, Dag], dict]:
    """Marginals, reference structure, and the SD golden tables in one call."""
    sd_tables = {
        "prior_mean": SD_PRIOR_MEAN,
        "posterior_mean_2012": SD_POSTERIOR_MEAN_2012,
        "interval_2012": SD_INTERVAL_2012,
        "evolution_man_24_34": SD_EVOLUTION_MAN_24_34,
        "cells": SD_CELLS,
    }
    return POPULATION_MARGINALS, reference_crc_network(), sd_tables

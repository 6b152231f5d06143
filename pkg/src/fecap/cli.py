"""Command-line surface: ``compute``, ``verify``, ``reproduce``, ``simulate``.

Problem documents are JSON.  Complex numbers are two-element ``[re, im]``
arrays, matrices are row-major arrays of such pairs, channels are objects
with a ``"kraus"`` list, theories carry a ``"kind"`` discriminator.  See the
README for the full schema.
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import FecapError, ParseError, ValidationError
from .fec import chi_of_encoding, fec_over_pool, purity_closed_form
from .linalg import SeededRng, derive_seed, random_density_matrix
from .protocol import (
    joint_distribution,
    mutual_information,
    mutual_information_stderr,
    pretty_good_measurement,
    pure_projectors := None,  # placeholder removed below
)
from .qcore import (
    DensityMatrix,
    EncodingEnsemble,
    Hamiltonian,
    KrausChannel,
    Povm,
    binary_entropy,
    von_neumann_entropy,
)
from .theories import (
    Activity,
    BasisContaining,
    Pointed,
    Purity,
    cyclic_twirl_unitaries,
    default_channel_pool,
)
from .verify import CHECKS, rho_mu, rho_nu, run_suite


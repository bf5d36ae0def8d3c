"""Tensor networks: contraction, MPS, DMRG and MERA."""

from .contract import Tensor, TensorNetwork, contract, matrix_tensor
from .dmrg import DmrgResult, dmrg_run, split_two_site
from .mera import (MERANetwork, causal_cone, mera_build_random, mera_causal_rdm, mera_local_expectation,
                   mera_state, mera_trivial)
from .mps import (MPS, is_left_isometry, is_right_isometry, left_canonicalize, mixed_canonicalize, mps_expectation,
                  mps_from_state, mps_inner, mps_schmidt_values, product_mps, random_mps, right_canonicalize)

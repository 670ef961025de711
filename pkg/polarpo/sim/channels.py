"""
Channel LLR sampling for the all-zero codeword.

BPSK maps bit 0 to +1, so every LLR is oriented with positive values
favouring 0. BEC erasures give LLR 0 and unerased symbols +∞.
"""

from typing import Tuple, Union

import numpy as np

from polarpo.models.channels import BmsChannel, ChannelModel


def sample_llr(
    channel: BmsChannel, shape: Union[int, Tuple[int, ...]], rng: np.random.Generator
) -> np.ndarray:
    """
    Channel LLRs observed when the all-zero word is sent.

    Args:
        channel: Channel model and parameter
        shape: Output shape
        rng: Random generator

    Returns:
        Float array of LLRs
    """
    p = channel.parameter
    if channel.model is ChannelModel.BEC:
        erased = rng.random(shape) < p
        return np.where(erased, 0.0, np.inf)
    if channel.model is ChannelModel.BSC:
        flipped = rng.random(shape) < p
        magnitude = np.log1p(-p) - np.log(p) if p > 0 else np.inf
        return np.where(flipped, -magnitude, magnitude)
    y = 1.0 + p * rng.standard_normal(shape)
    return 2.0 * y / (p * p)

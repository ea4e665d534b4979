"""VGG-style architecture search space.

Five blocks of 3x3 convolutions separated by 2x2 max pooling. Each block
chooses a repetition count and a channel width. Architectures are indexed
by a mixed-radix number whose digits are, from most significant,
(reps_1, channels_1, reps_2, channels_2, ...).
"""
from itertools import product
from math import prod
from typing import Iterator, List, NamedTuple, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator

from shared.errors import ArchSpaceError
from shared.models import LayerShape, NetworkConfig, PositiveInt

logger = structlog.get_logger()

INPUT_CHANNELS = 3
KERNEL, STRIDE, PADDING = 3, 1, 1


class ArchBlock(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    repetitions: Tuple[PositiveInt, ...] = Field(min_length=1)
    channels: Tuple[PositiveInt, ...] = Field(min_length=1)


class ArchSpace(BaseModel):
    """Ordered blocks with their choice lists; a pool precedes every block but the first."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    blocks: Tuple[ArchBlock, ...] = Field(min_length=1)

    @property
    def radices(self) -> Tuple[int, ...]:
        return tuple(
            n for block in self.blocks for n in (len(block.repetitions), len(block.channels))
        )


def default_arch_space() -> ArchSpace:
    """The VGG-16-derived space of 110,592 architectures."""
    wide = (320, 384, 448, 512)
    return ArchSpace(blocks=(
        ArchBlock(repetitions=(1, 2), channels=(40, 48, 56, 64)),
        ArchBlock(repetitions=(1, 2), channels=(80, 96, 112, 128)),
        ArchBlock(repetitions=(1, 2, 3), channels=(160, 192, 224, 256)),
        ArchBlock(repetitions=(1, 2, 3), channels=wide),
        ArchBlock(repetitions=(1, 2, 3), channels=wide),
    ))


class ArchChoice(BaseModel):
    """(repetitions, channels) selected for each block."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    selections: Tuple[Tuple[PositiveInt, PositiveInt], ...] = Field(min_length=1)

    @property
    def name(self) -> str:
        return "arch_" + "_".join(f"{r}x{c}" for r, c in self.selections)

    @property
    def depth(self) -> int:
        return sum(r for r, _ in self.selections)


class IndexedArch(NamedTuple):
    arch_index: int
    choice: ArchChoice


def space_size(space: ArchSpace) -> int:
    """Product over blocks of |repetitions| * |channels|."""
    return prod(space.radices)


def _check_index(space: ArchSpace, index: int) -> None:
    if not 0 <= index < space_size(space):
        raise ArchSpaceError(f"architecture index {index} outside 0..{space_size(space) - 1}")


def decode_arch(space: ArchSpace, index: int) -> ArchChoice:
    """Choice at a mixed-radix index."""
    _check_index(space, index)
    digits = []
    for radix in reversed(space.radices):
        index, digit = divmod(index, radix)
        digits.append(digit)
    digits.reverse()
    return ArchChoice(selections=tuple(
        (block.repetitions[digits[2 * b]], block.channels[digits[2 * b + 1]])
        for b, block in enumerate(space.blocks)
    ))


def encode_arch(space: ArchSpace, choice: ArchChoice) -> int:
    """Mixed-radix index of a choice."""
    if len(choice.selections) != len(space.blocks):
        raise ArchSpaceError(
            f"choice has {len(choice.selections)} blocks, space has {len(space.blocks)}"
        )
    index = 0
    for b, (block, (reps, channels)) in enumerate(zip(space.blocks, choice.selections)):
        if reps not in block.repetitions or channels not in block.channels:
            raise ArchSpaceError(f"block {b + 1}: ({reps}, {channels}) is not in the space")
        index = index * len(block.repetitions) + block.repetitions.index(reps)
        index = index * len(block.channels) + block.channels.index(channels)
    return index


def iter_archs(space: ArchSpace) -> Iterator[IndexedArch]:
    """Every architecture in index order."""
    per_block = [product(block.repetitions, block.channels) for block in space.blocks]
    for index, selections in enumerate(product(*per_block)):
        yield IndexedArch(index, ArchChoice(selections=selections))


def sample_archs(space: ArchSpace, n: int, seed: int) -> List[IndexedArch]:
    """
    Uniform sample without replacement, sorted by index.

    Raises:
        ArchSpaceError: n outside 1..space_size
    """
    size = space_size(space)
    if not 1 <= n <= size:
        raise ArchSpaceError(f"cannot sample {n} architectures from a space of {size}")
    indices = np.sort(np.random.default_rng(seed).choice(size, size=n, replace=False))
    logger.info("archs_sampled", n=n, space_size=size, seed=seed)
    return [IndexedArch(int(i), decode_arch(space, int(i))) for i in indices]


def expand(choice: ArchChoice, input_a: int) -> NetworkConfig:
    """
    Convolution stack of a choice: shape-preserving 3x3 layers, the
    feature map halving at each pool between blocks.

    Raises:
        ArchSpaceError: pooling shrinks the feature map below one pixel
    """
    if input_a < 1:
        raise ArchSpaceError(f"input size must be positive, got {input_a}")
    a, c = input_a, INPUT_CHANNELS
    layers = []
    for b, (reps, channels) in enumerate(choice.selections):
        if b:
            a //= 2
            if a < 1:
                raise ArchSpaceError(f"input {input_a} is too small for {len(choice.selections)} blocks")
        for r in range(reps):
            layers.append(LayerShape(
                a=a, c=c, f=channels, k=KERNEL, s=STRIDE, p=PADDING, pool=bool(b and r == 0)
            ))
            c = channels
    return NetworkConfig(name=choice.name, layers=tuple(layers))


def maximal_choice(space: ArchSpace) -> ArchChoice:
    return ArchChoice(selections=tuple(
        (max(block.repetitions), max(block.channels)) for block in space.blocks
    ))


def minimal_choice(space: ArchSpace) -> ArchChoice:
    return ArchChoice(selections=tuple(
        (min(block.repetitions), min(block.channels)) for block in space.blocks
    ))

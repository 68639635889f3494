"""Link bookkeeping for a linear repeater chain.

Nodes are numbered ``0..n_hops``. Every intermediate node has two memory
slots, one facing left and one facing right; the end nodes only have the slot
facing into the chain. A link ``(i, j)`` occupies the right-facing slot of
node ``i`` and the left-facing slot of node ``j``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .fidelity import DecayModel, fidelity_to_werner


class SpecificationError(ValueError):
    """A path description that no generation/swap history can produce."""


class ChainStateError(RuntimeError):
    """An operation was applied to a chain state that does not support it."""


@dataclass(frozen=True)
class PathSpec:
    n_hops: int
    prior_links: tuple[tuple[int, int], ...] = ()
    # storage age of each prior at t=0; defaults to all zeros
    prior_ages: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "prior_links", tuple(tuple(p) for p in self.prior_links))
        if self.prior_ages is not None:
            object.__setattr__(self, "prior_ages", tuple(self.prior_ages))
        validate_spec(self)

    @property
    def n_nodes(self) -> int:
        return self.n_hops + 1

    def ages(self) -> tuple[int, ...]:
        if self.prior_ages is None:
            return (0,) * len(self.prior_links)
        return self.prior_ages

    def label(self) -> str:
        if not self.prior_links:
            return f"{self.n_hops}-hop"
        return f"{self.n_hops}-hop[{format_prior_links(self.prior_links)}]"


def validate_spec(spec: PathSpec) -> None:
    if not isinstance(spec.n_hops, int) or spec.n_hops < 1:
        raise SpecificationError(f"n_hops must be a positive integer, got {spec.n_hops!r}")
    if spec.prior_ages is not None:
        if len(spec.prior_ages) != len(spec.prior_links):
            raise SpecificationError("prior_ages must have one entry per prior link")
        if any(a < 0 for a in spec.prior_ages):
            raise SpecificationError("prior ages must be non-negative")
    right_used = set()
    left_used = set()
    for i, j in spec.prior_links:
        if not (0 <= i < j <= spec.n_hops):
            raise SpecificationError(f"prior link ({i}, {j}) is outside nodes 0..{spec.n_hops}")
        if i in right_used or j in left_used:
            raise SpecificationError(f"prior link ({i}, {j}) reuses an occupied memory slot")
        right_used.add(i)
        left_used.add(j)
    links = sorted(spec.prior_links)
    for a, (i, j) in enumerate(links):
        for k, l in links[a + 1:]:
            if i < k < j < l:
                raise SpecificationError(
                    f"prior links ({i}, {j}) and ({k}, {l}) cross and cannot coexist"
                )


def parse_prior_links(text: str, base: int = 1) -> tuple[tuple[int, int], ...]:
    """Parse ``"1-2,3-5"`` into zero-based node pairs.

    Config files label nodes from ``base``; the default of 1 names the end
    nodes of an n-hop chain 1 and n+1.
    """
    text = text.strip()
    if not text:
        return ()
    pairs = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        try:
            a, b = chunk.split("-")
            i, j = int(a) - base, int(b) - base
        except ValueError:
            raise SpecificationError(f"cannot parse prior link {chunk!r}; expected 'i-j'") from None
        if i >= j:
            raise SpecificationError(f"prior link {chunk!r} must have i < j")
        pairs.append((i, j))
    return tuple(pairs)


def format_prior_links(pairs, base: int = 1) -> str:
    return ",".join(f"{i + base}-{j + base}" for i, j in pairs)


@dataclass(slots=True)
class WernerLink:
    left: int
    right: int
    birth_step: int
    formed_step: int
    w: float

    def age(self, current_step: int) -> int:
        return current_step - self.birth_step


@dataclass
class ChainState:
    spec: PathSpec
    # right_of[i]: link whose left end is node i; left_of[j]: link whose right end is j
    right_of: list = field(default_factory=list)
    left_of: list = field(default_factory=list)

    def __post_init__(self):
        n = self.spec.n_nodes
        if not self.right_of:
            self.right_of = [None] * n
        if not self.left_of:
            self.left_of = [None] * n

    @property
    def links(self) -> list[WernerLink]:
        return [link for link in self.right_of if link is not None]

    def add(self, link: WernerLink) -> None:
        if self.right_of[link.left] is not None or self.left_of[link.right] is not None:
            raise ChainStateError(f"memory slot conflict adding ({link.left}, {link.right})")
        self.right_of[link.left] = link
        self.left_of[link.right] = link

    def remove(self, link: WernerLink) -> None:
        self.right_of[link.left] = None
        self.left_of[link.right] = None

    def intervals(self) -> list[tuple[int, int]]:
        return [(link.left, link.right) for link in self.links]


def init_chain(spec: PathSpec, model: DecayModel, creation_noise: bool = True) -> ChainState:
    """Chain at t=0 holding the prior links of ``spec``.

    A prior spanning ``s`` elementary segments carries one creation-noise
    factor per segment, plus one decay factor per step of initial age.
    """
    chain = ChainState(spec)
    for (i, j), age in zip(spec.prior_links, spec.ages()):
        exponent = (j - i if creation_noise else 0) + age
        w = math.exp(-exponent / model.tau_steps)
        chain.add(WernerLink(i, j, birth_step=-age, formed_step=0, w=w))
    return chain


def eligible_generation_pairs(chain: ChainState) -> list[tuple[int, int]]:
    right_of, left_of = chain.right_of, chain.left_of
    return [
        (i, i + 1)
        for i in range(chain.spec.n_hops)
        if right_of[i] is None and left_of[i + 1] is None
    ]


def eligible_swap_nodes(chain: ChainState, current_step: int) -> list[int]:
    """Intermediate nodes holding two links that both predate ``current_step``."""
    nodes = []
    for node in range(1, chain.spec.n_hops):
        left = chain.left_of[node]
        right = chain.right_of[node]
        if (
            left is not None
            and right is not None
            and left.formed_step < current_step
            and right.formed_step < current_step
        ):
            nodes.append(node)
    return nodes


def apply_swap(
    chain: ChainState,
    node: int,
    success: bool,
    current_step: int,
    retain_on_failure: bool = False,
    rule: str = "product",
) -> ChainState:
    """Merge the two links meeting at ``node``.

    The merged link keeps the older birth step, so its age is that of its
    oldest constituent. With ``rule="product"`` its Werner parameter is the
    product of the two; with ``rule="oldest"`` it keeps the smaller one.
    """
    left = chain.left_of[node] if 0 < node < chain.spec.n_hops else None
    right = chain.right_of[node] if 0 < node < chain.spec.n_hops else None
    if left is None or right is None:
        raise ChainStateError(f"node {node} does not hold two links")
    if success:
        chain.remove(left)
        chain.remove(right)
        chain.add(
            WernerLink(
                left.left,
                right.right,
                birth_step=min(left.birth_step, right.birth_step),
                formed_step=current_step,
                w=left.w * right.w if rule == "product" else min(left.w, right.w),
            )
        )
    elif not retain_on_failure:
        chain.remove(left)
        chain.remove(right)
    return chain


def discard_stale(chain: ChainState, f_th: float, T: int, current_step: int) -> ChainState:
    """Drop links below the fidelity threshold or older than ``T`` steps."""
    w_min = fidelity_to_werner(f_th) - 1e-12
    for link in chain.links:
        if link.w < w_min or current_step - link.birth_step > T:
            chain.remove(link)
    return chain


def e2e_link(chain: ChainState) -> Optional[WernerLink]:
    link = chain.right_of[0]
    if link is not None and link.right == chain.spec.n_hops:
        return link
    return None

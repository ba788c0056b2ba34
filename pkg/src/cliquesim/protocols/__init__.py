"""Leader-election protocol factories for the sync and async engines."""

from .sync_det import improved_afek_gafni, small_id_broadcast
from .sync_rand import las_vegas_three_round, two_round_adversarial
from .async_tradeoff import async_tradeoff
from .async_levels import async_levels

__all__ = [
    "improved_afek_gafni",
    "small_id_broadcast",
    "las_vegas_three_round",
    "two_round_adversarial",
    "async_tradeoff",
    "async_levels",
]

"""cliquesim: a leader-election simulation laboratory for clique networks.

Synchronous and asynchronous engines, six election protocols spanning the
message/time tradeoff, adversarial wake-up and scheduling, an adaptive
isolating port-mapping adversary, and a Monte Carlo experiment runner.
"""

from .model import (UNDECIDED, LEADER, NON_LEADER, ConfigError, MappingError,
                    Endpoint, IdAssignment, PortMapping, PartialPortMapping,
                    CommGraph, random_id_assignment, random_port_mapping,
                    resolve)
from .sync_engine import run_sync, single_send, SyncResult, NodeCtx, BROADCAST
from .async_engine import (run_async, AsyncResult, SchedulerError,
                           unit_delay, uniform_random_delay, adaptive,
                           FROM_FIRST_WAKE, FROM_LAST_SPONTANEOUS_WAKE)
from .adversary import (IsolatingPortAdversary, isolating_port_adversary,
                        slow_competes, fast_wakeups_slow_elections,
                        fifo_stress)
from .protocols import (improved_afek_gafni, small_id_broadcast,
                        las_vegas_three_round, two_round_adversarial,
                        async_tradeoff, async_levels)

__version__ = "0.1.0"

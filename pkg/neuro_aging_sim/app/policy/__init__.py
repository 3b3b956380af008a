"""Run-time reliability-management policies: none, fixed-interval and dynamic."""

from .api import (
    AgingView,
    DynamicPolicy,
    FixedIntervalPolicy,
    NoManagementPolicy,
    ReliabilityPolicy,
    build_policy,
    predict_idle_gap,
)
from .models import (
    Action,
    ActionKind,
    DestressQueue,
    DestressRecord,
    PolicyConfig,
    PolicyKind,
    QueueEntry,
    Trigger,
)
from .utils import DESTRESS_LOG_HEADER, count_by_trigger, mean_interval, write_destress_log

__all__ = [
    "AgingView",
    "DynamicPolicy",
    "FixedIntervalPolicy",
    "NoManagementPolicy",
    "ReliabilityPolicy",
    "build_policy",
    "predict_idle_gap",
    "Action",
    "ActionKind",
    "DestressQueue",
    "DestressRecord",
    "PolicyConfig",
    "PolicyKind",
    "QueueEntry",
    "Trigger",
    "DESTRESS_LOG_HEADER",
    "count_by_trigger",
    "mean_interval",
    "write_destress_log",
]

"""
Tests for the reliability-management policies and their de-stress queue.
"""

import math

import pytest

from neuro_aging_sim.app.common.exceptions import ConfigurationError, DomainError
from neuro_aging_sim.app.policy import (
    Action,
    ActionKind,
    DestressQueue,
    DestressRecord,
    DynamicPolicy,
    FixedIntervalPolicy,
    NoManagementPolicy,
    PolicyConfig,
    PolicyKind,
    Trigger,
    build_policy,
    count_by_trigger,
    mean_interval,
    predict_idle_gap,
    write_destress_log,
)

MS = 1_000_000


class FakeView:
    """Aging view backed by plain dictionaries."""

    def __init__(self, num_tiles=2):
        self.num_tiles = num_tiles
        self.aging = {}
        self.destressed = {}
        self.busy = set()
        self.isis = {}

    def tile_max_aging(self, tile, now_ns):
        return self.aging.get(tile, 0.0)

    def destressed_max_aging(self, tile, now_ns):
        return self.destressed.get(tile, 0.0)

    def is_busy(self, tile, now_ns):
        return tile in self.busy

    def recent_isis(self, tile):
        return self.isis.get(tile, [])


@pytest.fixture
def dynamic():
    """Dynamic policy on two tiles with th_a 1.0, a 0.9 soft threshold and 10 ms windows."""
    config = PolicyConfig(kind=PolicyKind.DYNAMIC, th_a=1.0, soft_fraction=0.9, tdsc=0.01, idle_predictor_window=2)
    return DynamicPolicy(config, num_tiles=2)


def test_predict_idle_gap():
    """Test the trailing-mean idle predictor"""
    assert predict_idle_gap([0.01, 0.02, 0.03], window=2) == pytest.approx(0.025)
    assert predict_idle_gap([0.01], window=8) == pytest.approx(0.01)
    assert math.isinf(predict_idle_gap([], window=8))
    with pytest.raises(DomainError):
        predict_idle_gap([0.01], window=0)


def test_policy_config_validation():
    """Test policy parameter validation"""
    with pytest.raises(ConfigurationError) as exc_info:
        PolicyConfig(kind="adaptive")
    assert exc_info.value.field == "policy.kind"
    with pytest.raises(ConfigurationError):
        PolicyConfig(kind="fixed_interval", interval=0.01, tdsc=0.01)
    with pytest.raises(ConfigurationError):
        PolicyConfig(th_a=0.0)
    with pytest.raises(ConfigurationError):
        PolicyConfig(tdsc=1e-10)
    with pytest.raises(ConfigurationError):
        PolicyConfig.from_dict({"staggered": "yes"})
    with pytest.raises(ConfigurationError):
        PolicyConfig.from_dict({"threshold": 1.0})


def test_policy_config_from_dict():
    """Test reading a policy table and switching the strategy"""
    config = PolicyConfig.from_dict({"kind": "dynamic", "th_a": 2, "idle_predictor_window": 4})
    assert config.kind is PolicyKind.DYNAMIC
    assert config.soft_threshold == pytest.approx(1.8)
    assert config.tdsc_ns == 10 * MS
    fixed = config.with_kind(PolicyKind.FIXED_INTERVAL)
    assert fixed.kind is PolicyKind.FIXED_INTERVAL
    assert fixed.th_a == 2.0
    assert PolicyConfig.from_dict(fixed.to_dict()) == fixed


def test_build_policy():
    """Test policy selection by kind"""
    assert isinstance(build_policy(PolicyConfig(), 2), NoManagementPolicy)
    assert isinstance(build_policy(PolicyConfig(kind="fixed_interval"), 2), FixedIntervalPolicy)
    policy = build_policy(PolicyConfig(kind="dynamic"), 2)
    assert isinstance(policy, DynamicPolicy)
    assert policy.wants_event_ticks
    assert policy.name == "dynamic"


def test_no_management_never_acts():
    """Test that the baseline policy ignores every event"""
    view = FakeView()
    view.aging[0] = 100.0
    policy = NoManagementPolicy(PolicyConfig(), 2)
    assert policy.on_spike(0, 0, 0, view) == []
    assert policy.on_tick(0, view) == []
    assert policy.next_tick_ns() is None


def test_fixed_interval_ticks():
    """Test that every tile is de-stressed once per interval"""
    policy = FixedIntervalPolicy(PolicyConfig(kind="fixed_interval", interval=0.1, tdsc=0.01), 3)
    view = FakeView(3)
    assert policy.next_tick_ns() == 100 * MS
    assert policy.on_tick(99 * MS, view) == []
    actions = policy.on_tick(100 * MS, view)
    assert actions == [Action(ActionKind.DESTRESS_NOW, t, Trigger.PERIODIC) for t in range(3)]
    assert policy.next_tick_ns() == 200 * MS
    assert policy.on_spike(0, 0, 150 * MS, view) == []


def test_fixed_interval_staggered():
    """Test that staggered tiles are spread evenly over one interval"""
    policy = FixedIntervalPolicy(PolicyConfig(kind="fixed_interval", interval=0.1, tdsc=0.01, staggered=True), 4)
    assert [policy.offset_ns(t) for t in range(4)] == [0, 25 * MS, 50 * MS, 75 * MS]
    assert policy.on_tick(100 * MS, FakeView(4)) == [Action(ActionKind.DESTRESS_NOW, 0, Trigger.PERIODIC)]
    assert policy.next_tick_ns() == 125 * MS


def test_dynamic_hard_threshold(dynamic):
    """Test that reaching th_a on a spike de-stresses at once"""
    view = FakeView()
    view.aging[1] = 1.0
    assert dynamic.on_spike(1, 0, 5 * MS, view) == [Action(ActionKind.DESTRESS_NOW, 1, Trigger.HARD)]


def test_dynamic_soft_threshold_enqueues_once(dynamic):
    """Test that a tile past the soft threshold is queued once"""
    view = FakeView()
    view.aging[0] = 0.95
    assert dynamic.on_spike(0, 0, 5 * MS, view) == [Action(ActionKind.ENQUEUE, 0)]
    assert dynamic.on_spike(0, 1, 6 * MS, view) == []
    assert [e.tile for e in dynamic.queue] == [0]
    view.aging[1] = 0.5
    assert dynamic.on_spike(1, 0, 7 * MS, view) == []


def test_dynamic_tick_decisions(dynamic):
    """Test the queue drain: opportunistic, hard, waiting and recovered tiles"""
    view = FakeView(4)
    policy = DynamicPolicy(dynamic.config, num_tiles=4)
    for tile in range(4):
        view.aging[tile] = 0.95
        policy.on_spike(tile, 0, tile, view)

    view.isis[0] = [0.001, 0.05, 0.03]
    view.isis[1] = [0.001, 0.002]
    view.aging[2] = 1.2
    view.aging[3] = 0.5
    actions = policy.on_tick(10 * MS, view)

    assert actions == [
        Action(ActionKind.DESTRESS_NOW, 0, Trigger.OPPORTUNISTIC),
        Action(ActionKind.DESTRESS_NOW, 2, Trigger.HARD),
    ]
    assert 3 not in policy.queue
    assert 1 in policy.queue
    policy.notify_destress(0, 10 * MS)
    assert 0 not in policy.queue


def test_dynamic_tick_skips_busy_tiles(dynamic):
    """Test that a busy queued tile keeps its place"""
    view = FakeView()
    view.aging[0] = 1.5
    dynamic.queue.enqueue(0, 0, 0.95)
    view.busy.add(0)
    assert dynamic.on_tick(1 * MS, view) == []
    assert 0 in dynamic.queue


def test_dynamic_tick_without_history(dynamic):
    """Test that a tile with no ISI history counts as idle"""
    view = FakeView()
    view.aging[1] = 0.95
    dynamic.on_spike(1, 0, 0, view)
    assert dynamic.on_tick(1 * MS, view) == [Action(ActionKind.DESTRESS_NOW, 1, Trigger.OPPORTUNISTIC)]


def test_dynamic_tick_serves_entries_behind_a_busy_head(dynamic):
    """Test that a de-stressing head of the queue does not hold back the tiles behind it"""
    view = FakeView()
    view.aging[0] = view.aging[1] = 0.95
    dynamic.on_spike(0, 0, 0, view)
    dynamic.on_spike(1, 0, 1, view)
    view.busy.add(0)
    assert dynamic.on_tick(2 * MS, view) == [Action(ActionKind.DESTRESS_NOW, 1, Trigger.OPPORTUNISTIC)]
    assert [e.tile for e in dynamic.queue] == [0, 1]


def test_dynamic_leaves_worn_out_tiles_alone(dynamic):
    """Test that a tile a window cannot bring below th_a gets no window until it recovers"""
    view = FakeView()
    view.aging[0] = 1.2
    view.destressed[0] = 1.05
    assert dynamic.on_spike(0, 0, 5 * MS, view) == []
    assert 0 in dynamic.worn_out

    dynamic.queue.enqueue(0, 6 * MS, 1.2)
    assert dynamic.on_tick(6 * MS, view) == []
    assert 0 not in dynamic.queue

    view.destressed[0] = 0.9
    assert dynamic.on_spike(0, 0, 7 * MS, view) == [Action(ActionKind.DESTRESS_NOW, 0, Trigger.HARD)]
    assert 0 not in dynamic.worn_out


def test_destress_queue():
    """Test FIFO order and uniqueness"""
    queue = DestressQueue()
    assert queue.enqueue(2, 0, 0.9)
    assert queue.enqueue(0, 1, 0.95)
    assert not queue.enqueue(2, 2, 0.99)
    assert [e.tile for e in queue.entries()] == [2, 0]
    assert queue.remove(2)
    assert not queue.remove(2)
    assert len(queue) == 1


def test_destress_log_helpers(tmp_path):
    """Test trigger counts, the budget-matched interval and the log layout"""
    records = [
        DestressRecord(time_ns=100 * MS, tile=0, trigger=Trigger.PERIODIC, aging_at_issue=0.25, tdsc_ns=10 * MS),
        DestressRecord(time_ns=100 * MS, tile=1, trigger=Trigger.PERIODIC, aging_at_issue=0.5, tdsc_ns=10 * MS),
        DestressRecord(time_ns=150 * MS, tile=1, trigger=Trigger.HARD, aging_at_issue=1.0, tdsc_ns=10 * MS),
        DestressRecord(time_ns=180 * MS, tile=0, trigger=Trigger.OPPORTUNISTIC, aging_at_issue=0.9, tdsc_ns=10 * MS),
    ]
    assert count_by_trigger(records) == {"hard": 1, "opportunistic": 1, "periodic": 2}
    assert mean_interval(records, 1_000_000_000, 2) == pytest.approx(0.5)
    assert mean_interval([], 1_000_000_000, 2) is None
    with pytest.raises(DomainError):
        mean_interval(records, 0, 2)
    assert records[0].end_ns == 110 * MS

    lines = write_destress_log(tmp_path / "destress_log.csv", records).read_text().splitlines()
    assert lines[0] == "time,tile,trigger,aging_at_issue,tdsc"
    assert lines[1] == "0.100000000,0,periodic,0.25,0.010000000"
    assert len(lines) == 5

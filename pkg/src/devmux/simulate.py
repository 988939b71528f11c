"""Deterministic routing simulation and paired policy comparison.

Each arriving task observes the current network state (a Markov chain
stepped once per arrival), forms a routing state, and is charged the cost
model's latency/energy/accuracy for the action its policy picks. Random
draws are pre-generated from the seed in a fixed order, so two policies run
against the same workload see the identical network trace and the paired
comparison is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from .routing import (
    Action,
    Battery,
    Complexity,
    CostModel,
    DEFAULT_P_DRAIN,
    DeviceProfile,
    NETWORK_STATES,
    NetworkModel,
    NetworkState,
    RoutingPolicy,
    RoutingState,
    TaskKind,
    build_mdp,
    cost_breakdown,
    default_network_model,
    featurize_task,
    route,
    value_iteration,
)
from .workload import Workload, WorkloadSpec, generate_workload


class PolicyKind(str, Enum):
    ALL_CLOUD = "all_cloud"
    ALL_EDGE = "all_edge"
    THRESHOLD = "threshold"
    MDP = "mdp"


def _default_complexity_mix() -> dict[Complexity, float]:
    return {Complexity.LOW: 0.5, Complexity.MEDIUM: 0.4, Complexity.HIGH: 0.1}


@dataclass(eq=False)
class SimConfig:
    n_tasks: int = 1000
    seed: int = 42
    policy: PolicyKind = PolicyKind.MDP
    device: DeviceProfile = field(default_factory=DeviceProfile)
    network: NetworkModel | None = None
    cost: CostModel = field(default_factory=CostModel)
    workload_spec: WorkloadSpec = field(default_factory=WorkloadSpec)
    initial_network: NetworkState = NetworkState.GOOD
    p_drain: float = DEFAULT_P_DRAIN
    complexity_mix: dict[Complexity, float] = field(default_factory=_default_complexity_mix)
    offline_timeout_ms: float = 10_000.0
    sub_second_ms: float = 1000.0

    def __post_init__(self) -> None:
        if self.network is None:
            self.network = default_network_model(self.device)
        if self.n_tasks < 0:
            raise ValueError("n_tasks must be >= 0")


@dataclass(frozen=True)
class SimEvent:
    task_id: int
    arrival_s: float
    kind: TaskKind
    complexity: Complexity
    network: NetworkState
    battery: Battery
    action: Action
    latency_ms: float
    energy_units: float
    accuracy_loss: float
    failed: bool

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "arrival_s": self.arrival_s,
            "kind": self.kind.value,
            "complexity": self.complexity.value,
            "network": self.network.value,
            "battery": self.battery.value,
            "action": self.action.value,
            "latency_ms": self.latency_ms,
            "energy_units": self.energy_units,
            "accuracy_loss": self.accuracy_loss,
            "failed": self.failed,
        }


@dataclass(frozen=True)
class MetricsReport:
    n_tasks: int
    median_latency_ms: float
    p95_latency_ms: float
    sub_second_fraction: float
    cloud_call_fraction: float
    total_energy_units: float
    mean_accuracy_loss: float
    failed_count: int

    def to_dict(self) -> dict:
        return {
            "n_tasks": self.n_tasks,
            "median_latency_ms": self.median_latency_ms,
            "p95_latency_ms": self.p95_latency_ms,
            "sub_second_fraction": self.sub_second_fraction,
            "cloud_call_fraction": self.cloud_call_fraction,
            "total_energy_units": self.total_energy_units,
            "mean_accuracy_loss": self.mean_accuracy_loss,
            "failed_count": self.failed_count,
        }

    NUMERIC_FIELDS = (
        "median_latency_ms",
        "p95_latency_ms",
        "sub_second_fraction",
        "cloud_call_fraction",
        "total_energy_units",
        "mean_accuracy_loss",
        "failed_count",
    )


def metrics_from_events(events: list[SimEvent], sub_second_ms: float = 1000.0) -> MetricsReport:
    """Aggregate an event log. Median averages the two middle samples;
    p95 is the smallest latency covering 95% of the mass; sub-second means
    strictly below the threshold."""
    n = len(events)
    if n == 0:
        return MetricsReport(0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0)
    latencies = sorted(e.latency_ms for e in events)
    p95_rank = max(math.ceil(0.95 * n) - 1, 0)
    return MetricsReport(
        n_tasks=n,
        median_latency_ms=float(np.median(latencies)),
        p95_latency_ms=latencies[p95_rank],
        sub_second_fraction=sum(1 for e in events if e.latency_ms < sub_second_ms) / n,
        cloud_call_fraction=sum(1 for e in events if e.action is Action.CLOUD) / n,
        total_energy_units=float(sum(e.energy_units for e in events)),
        mean_accuracy_loss=float(sum(e.accuracy_loss for e in events) / n),
        failed_count=sum(1 for e in events if e.failed),
    )


def solve_policy(config: SimConfig) -> RoutingPolicy:
    mdp = build_mdp(config.device, config.network, config.cost, config.complexity_mix, config.p_drain)
    return value_iteration(mdp)


def workload_from_config(config: SimConfig) -> Workload:
    return generate_workload(config.n_tasks, config.seed, config.workload_spec)


def _max_energy(device: DeviceProfile, network: NetworkModel) -> float:
    return max(
        max(device.edge_energy_units.values()),
        max(network.cloud_energy_units.values()),
    )


def run_simulation(
    workload: Workload,
    config: SimConfig,
    policy: RoutingPolicy | None = None,
) -> tuple[MetricsReport, list[SimEvent]]:
    """Play a workload through one routing policy.

    The MDP policy is solved from the config when not supplied. A cloud
    decision while offline (reachable only for the all-cloud baseline) is
    recorded as a failed task charged the configured timeout, not a crash.
    """
    policy_kind = config.policy
    if policy_kind is PolicyKind.MDP and policy is None:
        policy = solve_policy(config)

    n = len(workload.tasks)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([config.seed, 1])))
    u_battery = rng.random(n)
    u_network = rng.random(n)

    transition_cumulative = np.cumsum(config.network.transition_matrix, axis=1)
    network_state = config.initial_network
    battery = config.device.battery
    max_energy = _max_energy(config.device, config.network)

    events: list[SimEvent] = []
    for i, task in enumerate(workload.tasks):
        complexity = featurize_task(task.descriptor).complexity
        state = RoutingState(complexity, config.device.device_class, network_state, battery)

        if policy_kind is PolicyKind.ALL_EDGE:
            action = Action.EDGE
        elif policy_kind is PolicyKind.ALL_CLOUD:
            action = Action.CLOUD
        elif policy_kind is PolicyKind.THRESHOLD:
            action = (
                Action.CLOUD
                if complexity is Complexity.HIGH and network_state is not NetworkState.OFFLINE
                else Action.EDGE
            )
        else:
            action = route(policy, state)

        failed = action is Action.CLOUD and network_state is NetworkState.OFFLINE
        if failed:
            latency = config.offline_timeout_ms
            energy = config.network.cloud_energy_units[complexity]
            accuracy_loss = 0.0
        else:
            parts = cost_breakdown(config.device, config.network, state, action)
            latency, energy, accuracy_loss = parts.latency_ms, parts.energy_units, parts.accuracy_loss

        events.append(
            SimEvent(
                task_id=i,
                arrival_s=task.arrival_s,
                kind=task.descriptor.kind,
                complexity=complexity,
                network=network_state,
                battery=battery,
                action=action,
                latency_ms=latency,
                energy_units=energy,
                accuracy_loss=accuracy_loss,
                failed=failed,
            )
        )

        if battery is Battery.OK and max_energy > 0:
            if u_battery[i] < config.p_drain * (energy / max_energy):
                battery = Battery.LOW
        row = NETWORK_STATES.index(network_state)
        network_state = NETWORK_STATES[
            int(np.searchsorted(transition_cumulative[row], u_network[i], side="right").clip(0, 2))
        ]

    return metrics_from_events(events, config.sub_second_ms), events


@dataclass(eq=False)
class ComparisonReport:
    baseline: str
    reports: dict[str, MetricsReport]
    deltas: dict[str, dict[str, float]]

    def to_dict(self) -> dict:
        return {
            "baseline": self.baseline,
            "reports": {name: r.to_dict() for name, r in self.reports.items()},
            "deltas": self.deltas,
        }

    def csv_rows(self) -> list[list]:
        header = ["policy", "n_tasks", *MetricsReport.NUMERIC_FIELDS]
        rows = [header]
        for name, report in self.reports.items():
            d = report.to_dict()
            rows.append([name, d["n_tasks"], *[d[f] for f in MetricsReport.NUMERIC_FIELDS]])
        return rows


def compare_policies(workload: Workload, configs: Mapping[str, SimConfig]) -> ComparisonReport:
    """Run several policies against one workload and report paired deltas.

    Every config must carry the workload's seed (the comparison is paired);
    the first entry is the delta baseline.
    """
    if not configs:
        raise ValueError("need at least one policy config")
    for name, config in configs.items():
        if config.seed != workload.seed:
            raise ValueError(f"config {name!r} seed {config.seed} != workload seed {workload.seed}")

    reports: dict[str, MetricsReport] = {}
    task_sequences: dict[str, list[int]] = {}
    for name, config in configs.items():
        report, events = run_simulation(workload, config)
        reports[name] = report
        task_sequences[name] = [e.task_id for e in events]

    baseline_name = next(iter(configs))
    baseline_tasks = task_sequences[baseline_name]
    for name, sequence in task_sequences.items():
        if sequence != baseline_tasks:
            raise RuntimeError(f"policy {name!r} saw a different task sequence; pairing broken")

    baseline = reports[baseline_name].to_dict()
    deltas = {}
    for name, report in reports.items():
        d = report.to_dict()
        deltas[name] = {f: d[f] - baseline[f] for f in MetricsReport.NUMERIC_FIELDS}
    return ComparisonReport(baseline=baseline_name, reports=reports, deltas=deltas)

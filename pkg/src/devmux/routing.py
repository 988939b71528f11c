"""Edge/cloud routing of developer-assistant tasks as a discounted MDP.

Where a task runs (on the local device or on a remote model endpoint) is
posed as a finite Markov decision process over task complexity, device
class, network quality, and battery level. Value iteration produces a
dense lookup policy that the simulator and the CLI consult per task.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class TaskKind(str, Enum):
    SYNTAX_FIX = "syntax_fix"
    COMPLETION = "completion"
    REFACTOR = "refactor"
    CRASH_ANALYSIS = "crash_analysis"


class Complexity(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"


class DeviceClass(str, Enum):
    CPU_ONLY = "cpu"
    GPU = "gpu"


class Battery(str, Enum):
    LOW = "low"
    OK = "ok"


class NetworkState(str, Enum):
    GOOD = "good"
    DEGRADED = "degraded"
    OFFLINE = "offline"


class Action(str, Enum):
    EDGE = "edge"
    CLOUD = "cloud"


COMPLEXITIES = (Complexity.LOW, Complexity.MEDIUM, Complexity.HIGH)
DEVICE_CLASSES = (DeviceClass.CPU_ONLY, DeviceClass.GPU)
NETWORK_STATES = (NetworkState.GOOD, NetworkState.DEGRADED, NetworkState.OFFLINE)
BATTERY_LEVELS = (Battery.LOW, Battery.OK)
ACTIONS = (Action.EDGE, Action.CLOUD)

N_STATES = len(COMPLEXITIES) * len(DEVICE_CLASSES) * len(NETWORK_STATES) * len(BATTERY_LEVELS)

STOCHASTIC_TOL = 1e-9


class IllegalActionError(ValueError):
    """Raised when an action is queried for a state where it is masked out."""


@dataclass(frozen=True)
class TaskDescriptor:
    """A unit of assistant work as observed at submission time."""

    kind: TaskKind
    files_touched: int
    cross_file_deps: int
    token_length: int

    def __post_init__(self) -> None:
        if not isinstance(self.kind, TaskKind):
            raise ValueError(f"kind must be a TaskKind, got {self.kind!r}")
        for name in ("files_touched", "cross_file_deps", "token_length"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class TaskFeatures:
    complexity: Complexity


def featurize_task(task: TaskDescriptor) -> TaskFeatures:
    """Map a task descriptor to a complexity level by a fixed rule table.

    Crash analysis is always high complexity; otherwise heavy cross-file
    coupling or wide file footprints are high, any cross-file dependency or
    a long prompt is medium, and the remainder is low.
    """
    if task.kind is TaskKind.CRASH_ANALYSIS:
        return TaskFeatures(Complexity.HIGH)
    if task.cross_file_deps >= 5 or task.files_touched >= 10:
        return TaskFeatures(Complexity.HIGH)
    if task.cross_file_deps >= 1 or task.token_length >= 2000:
        return TaskFeatures(Complexity.MEDIUM)
    return TaskFeatures(Complexity.LOW)


@dataclass(frozen=True)
class RoutingState:
    complexity: Complexity
    device_class: DeviceClass
    network: NetworkState
    battery: Battery

    @property
    def index(self) -> int:
        ci = COMPLEXITIES.index(self.complexity)
        di = DEVICE_CLASSES.index(self.device_class)
        ni = NETWORK_STATES.index(self.network)
        bi = BATTERY_LEVELS.index(self.battery)
        return ((ci * len(DEVICE_CLASSES) + di) * len(NETWORK_STATES) + ni) * len(BATTERY_LEVELS) + bi


def all_states() -> tuple[RoutingState, ...]:
    """All routing states in dense index order."""
    states = []
    for c in COMPLEXITIES:
        for d in DEVICE_CLASSES:
            for n in NETWORK_STATES:
                for b in BATTERY_LEVELS:
                    states.append(RoutingState(c, d, n, b))
    return tuple(states)


def _default_edge_latency() -> dict[Complexity, float]:
    return {Complexity.LOW: 150.0, Complexity.MEDIUM: 400.0, Complexity.HIGH: 1200.0}


def _default_edge_energy() -> dict[Complexity, float]:
    return {Complexity.LOW: 1.0, Complexity.MEDIUM: 2.0, Complexity.HIGH: 5.0}


def _default_edge_accuracy_loss() -> dict[Complexity, float]:
    # High-complexity loss mirrors the accuracy sacrifice observed for
    # on-device handling of complex mobile tasks.
    return {Complexity.LOW: 0.0, Complexity.MEDIUM: 0.05, Complexity.HIGH: 0.29}


@dataclass(frozen=True)
class DeviceProfile:
    """Local execution characteristics of the developer's machine.

    Latency entries are the GPU baseline; CPU-only devices pay
    ``cpu_latency_multiplier`` on top.
    """

    device_class: DeviceClass = DeviceClass.CPU_ONLY
    battery: Battery = Battery.OK
    edge_base_latency_ms: dict[Complexity, float] = field(default_factory=_default_edge_latency)
    edge_energy_units: dict[Complexity, float] = field(default_factory=_default_edge_energy)
    edge_accuracy_loss: dict[Complexity, float] = field(default_factory=_default_edge_accuracy_loss)
    cpu_latency_multiplier: float = 2.0

    def __post_init__(self) -> None:
        for c in COMPLEXITIES:
            if self.edge_base_latency_ms[c] <= 0:
                raise ValueError("edge latencies must be > 0")
            if not 0.0 <= self.edge_accuracy_loss[c] <= 1.0:
                raise ValueError("accuracy loss must be in [0, 1]")
            if self.edge_energy_units[c] < 0:
                raise ValueError("edge energy must be >= 0")
        if self.cpu_latency_multiplier <= 0:
            raise ValueError("cpu_latency_multiplier must be > 0")

    def edge_latency_ms(self, complexity: Complexity, device_class: DeviceClass) -> float:
        base = self.edge_base_latency_ms[complexity]
        if device_class is DeviceClass.CPU_ONLY:
            return base * self.cpu_latency_multiplier
        return base


DEFAULT_GOOD_RTT_MS = 2400.0  # median round trip observed for cloud-hosted assistants
DEFAULT_DEGRADED_RTT_FACTOR = 3.0
DEFAULT_CLOUD_ENERGY_RATIO = 3.8  # cloud-bound work costs this multiple of on-device energy


def _default_cloud_compute() -> dict[Complexity, float]:
    return {Complexity.LOW: 100.0, Complexity.MEDIUM: 250.0, Complexity.HIGH: 600.0}


@dataclass(frozen=True, eq=False)
class NetworkModel:
    """Markov chain over link quality plus the cloud-side cost tables."""

    transition_matrix: np.ndarray
    rtt_ms: dict[NetworkState, float]
    cloud_compute_ms: dict[Complexity, float]
    cloud_energy_units: dict[Complexity, float]

    def __post_init__(self) -> None:
        m = np.asarray(self.transition_matrix, dtype=np.float64)
        if m.shape != (len(NETWORK_STATES), len(NETWORK_STATES)):
            raise ValueError("transition_matrix must be 3x3")
        if (m < 0).any():
            raise ValueError("transition probabilities must be >= 0")
        if np.abs(m.sum(axis=1) - 1.0).max() > STOCHASTIC_TOL:
            raise ValueError("transition_matrix rows must each sum to 1")
        object.__setattr__(self, "transition_matrix", m)
        if NetworkState.OFFLINE in self.rtt_ms:
            raise ValueError("offline state has no round-trip time")
        for state in (NetworkState.GOOD, NetworkState.DEGRADED):
            if self.rtt_ms[state] <= 0:
                raise ValueError("rtt_ms must be > 0")
        for c in COMPLEXITIES:
            if self.cloud_compute_ms[c] < 0 or self.cloud_energy_units[c] < 0:
                raise ValueError("cloud cost tables must be >= 0")


def default_network_model(
    device: DeviceProfile | None = None,
    good_rtt_ms: float = DEFAULT_GOOD_RTT_MS,
    degraded_rtt_factor: float = DEFAULT_DEGRADED_RTT_FACTOR,
    cloud_energy_ratio: float = DEFAULT_CLOUD_ENERGY_RATIO,
) -> NetworkModel:
    """Default network: mostly good, occasionally degraded, rarely offline."""
    device = device or DeviceProfile()
    matrix = np.array(
        [
            [0.92, 0.06, 0.02],
            [0.25, 0.70, 0.05],
            [0.30, 0.30, 0.40],
        ]
    )
    return NetworkModel(
        transition_matrix=matrix,
        rtt_ms={
            NetworkState.GOOD: good_rtt_ms,
            NetworkState.DEGRADED: good_rtt_ms * degraded_rtt_factor,
        },
        cloud_compute_ms=_default_cloud_compute(),
        cloud_energy_units={c: cloud_energy_ratio * device.edge_energy_units[c] for c in COMPLEXITIES},
    )


@dataclass(frozen=True)
class CostModel:
    """Linear weights turning (latency, energy, accuracy loss) into scalar cost."""

    w_latency: float = 0.001
    w_energy: float = 0.1
    w_accuracy: float = 10.0
    discount_gamma: float = 0.95

    def __post_init__(self) -> None:
        if min(self.w_latency, self.w_energy, self.w_accuracy) < 0:
            raise ValueError("cost weights must be >= 0")
        if not 0.0 <= self.discount_gamma < 1.0:
            raise ValueError("discount_gamma must be in [0, 1)")


@dataclass(frozen=True)
class CostBreakdown:
    latency_ms: float
    energy_units: float
    accuracy_loss: float


def cost_breakdown(
    device: DeviceProfile, network: NetworkModel, state: RoutingState, action: Action
) -> CostBreakdown:
    """Unweighted cost components of executing a task in `state` via `action`."""
    if action is Action.EDGE:
        return CostBreakdown(
            latency_ms=device.edge_latency_ms(state.complexity, state.device_class),
            energy_units=device.edge_energy_units[state.complexity],
            accuracy_loss=device.edge_accuracy_loss[state.complexity],
        )
    if state.network is NetworkState.OFFLINE:
        raise IllegalActionError("cloud execution is masked out while offline")
    return CostBreakdown(
        latency_ms=network.rtt_ms[state.network] + network.cloud_compute_ms[state.complexity],
        energy_units=network.cloud_energy_units[state.complexity],
        accuracy_loss=0.0,
    )


def _default_complexity_mix() -> dict[Complexity, float]:
    return {Complexity.LOW: 0.5, Complexity.MEDIUM: 0.4, Complexity.HIGH: 0.1}


DEFAULT_P_DRAIN = 0.05


@dataclass(eq=False)
class MdpModel:
    """Dense tabular MDP over the 36 routing states and two actions.

    `rewards` is (n_states, n_actions), `transitions` is
    (n_actions, n_states, n_states), `action_mask` is (n_states, n_actions)
    bool. Immutable by convention after construction.
    """

    states: tuple[RoutingState, ...]
    rewards: np.ndarray
    transitions: np.ndarray
    action_mask: np.ndarray
    gamma: float
    device: DeviceProfile | None = None
    network: NetworkModel | None = None
    cost: CostModel | None = None

    def __post_init__(self) -> None:
        n = len(self.states)
        self.rewards = np.asarray(self.rewards, dtype=np.float64)
        self.transitions = np.asarray(self.transitions, dtype=np.float64)
        self.action_mask = np.asarray(self.action_mask, dtype=bool)
        if self.rewards.shape != (n, len(ACTIONS)):
            raise ValueError("rewards must be (n_states, n_actions)")
        if self.transitions.shape != (len(ACTIONS), n, n):
            raise ValueError("transitions must be (n_actions, n_states, n_states)")
        if self.action_mask.shape != (n, len(ACTIONS)):
            raise ValueError("action_mask must be (n_states, n_actions)")
        if not self.action_mask.any(axis=1).all():
            raise ValueError("every state needs at least one legal action")
        if not np.isfinite(self.rewards[self.action_mask]).all():
            raise ValueError("rewards must be finite for legal actions")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError("gamma must be in [0, 1)")
        for ai in range(len(ACTIONS)):
            legal = self.action_mask[:, ai]
            rows = self.transitions[ai][legal]
            if rows.size and np.abs(rows.sum(axis=1) - 1.0).max() > STOCHASTIC_TOL:
                raise ValueError("legal transition rows must each sum to 1")


def build_mdp(
    device: DeviceProfile,
    network: NetworkModel,
    cost: CostModel,
    workload_mix: dict[Complexity, float] | None = None,
    p_drain: float = DEFAULT_P_DRAIN,
) -> MdpModel:
    """Assemble the routing MDP.

    Rewards are negated weighted costs. Between decisions the network
    evolves by its Markov chain, the next task's complexity is redrawn
    i.i.d. from `workload_mix`, the battery may drop from ok to low in
    proportion to the energy just spent (low is absorbing), and the device
    class stays fixed.
    """
    mix = dict(workload_mix) if workload_mix is not None else _default_complexity_mix()
    if set(mix) != set(COMPLEXITIES):
        raise ValueError("workload_mix must cover low/medium/high")
    mix_values = np.array([mix[c] for c in COMPLEXITIES], dtype=np.float64)
    if (mix_values < 0).any():
        raise ValueError("workload_mix entries must be >= 0")
    if abs(mix_values.sum() - 1.0) > STOCHASTIC_TOL:
        raise ValueError("workload_mix must sum to 1")
    mix_values = mix_values / mix_values.sum()
    if not 0.0 <= p_drain <= 1.0:
        raise ValueError("p_drain must be in [0, 1]")

    net_matrix = np.asarray(network.transition_matrix, dtype=np.float64)
    if np.abs(net_matrix.sum(axis=1) - 1.0).max() > STOCHASTIC_TOL:
        raise ValueError("network transition matrix must be row-stochastic")

    states = all_states()
    n = len(states)
    rewards = np.zeros((n, len(ACTIONS)))
    transitions = np.zeros((len(ACTIONS), n, n))
    mask = np.ones((n, len(ACTIONS)), dtype=bool)

    max_energy = max(
        max(device.edge_energy_units[c] for c in COMPLEXITIES),
        max(network.cloud_energy_units[c] for c in COMPLEXITIES),
    )

    for s, state in enumerate(states):
        ni = NETWORK_STATES.index(state.network)
        for ai, action in enumerate(ACTIONS):
            if action is Action.CLOUD and state.network is NetworkState.OFFLINE:
                mask[s, ai] = False
                continue
            parts = cost_breakdown(device, network, state, action)
            rewards[s, ai] = -(
                cost.w_latency * parts.latency_ms
                + cost.w_energy * parts.energy_units
                + cost.w_accuracy * parts.accuracy_loss
            )
            if state.battery is Battery.OK and max_energy > 0:
                p_to_low = p_drain * (parts.energy_units / max_energy)
            else:
                p_to_low = 1.0 if state.battery is Battery.LOW else 0.0
            for ci, c_next in enumerate(COMPLEXITIES):
                for nj in range(len(NETWORK_STATES)):
                    p_base = mix_values[ci] * net_matrix[ni, nj]
                    if p_base == 0.0:
                        continue
                    for b_next, p_batt in (
                        (Battery.LOW, p_to_low),
                        (Battery.OK, 1.0 - p_to_low),
                    ):
                        if state.battery is Battery.LOW and b_next is Battery.OK:
                            continue
                        if p_batt == 0.0:
                            continue
                        nxt = RoutingState(c_next, state.device_class, NETWORK_STATES[nj], b_next)
                        transitions[ai, s, nxt.index] += p_base * p_batt

    return MdpModel(
        states=states,
        rewards=rewards,
        transitions=transitions,
        action_mask=mask,
        gamma=cost.discount_gamma,
        device=device,
        network=network,
        cost=cost,
    )


def expected_cost_breakdown(mdp: MdpModel, state: RoutingState, action: Action) -> CostBreakdown:
    """Unweighted cost components behind `reward(state, action)`.

    Raises IllegalActionError for a masked action.
    """
    if mdp.device is None or mdp.network is None:
        raise ValueError("model carries no device/network profiles")
    if not mdp.action_mask[state.index, ACTIONS.index(action)]:
        raise IllegalActionError(f"action {action.value} is masked in state {state}")
    return cost_breakdown(mdp.device, mdp.network, state, action)


@dataclass(eq=False)
class RoutingPolicy:
    """Solved policy: per-state action and value plus solver diagnostics."""

    actions: np.ndarray  # int, index into ACTIONS
    values: np.ndarray
    residual: float
    delta_history: tuple[float, ...] = ()

    def action_for(self, state: RoutingState) -> Action:
        return ACTIONS[int(self.actions[state.index])]


def value_iteration(mdp: MdpModel, tolerance: float = 1e-8) -> RoutingPolicy:
    """Solve the MDP by synchronous Bellman backups from V = 0.

    Iterates until the sup-norm change drops to `tolerance`; the greedy
    action ties break toward edge execution (the privacy-preserving side).
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be > 0")
    rewards = mdp.rewards
    mask = mdp.action_mask
    gamma = mdp.gamma
    n = rewards.shape[0]

    values = np.zeros(n)
    deltas: list[float] = []
    while True:
        expected = mdp.transitions @ values  # (n_actions, n_states)
        q = rewards + gamma * expected.T
        q = np.where(mask, q, -np.inf)
        new_values = q.max(axis=1)
        delta = float(np.max(np.abs(new_values - values)))
        deltas.append(delta)
        values = new_values
        if delta <= tolerance:
            break

    expected = mdp.transitions @ values
    q = np.where(mask, rewards + gamma * expected.T, -np.inf)
    edge_i, cloud_i = ACTIONS.index(Action.EDGE), ACTIONS.index(Action.CLOUD)
    actions = (q[:, cloud_i] > q[:, edge_i]).astype(np.int8)
    return RoutingPolicy(
        actions=actions, values=values, residual=deltas[-1], delta_history=tuple(deltas)
    )


def route(policy: RoutingPolicy, state: RoutingState) -> Action:
    """O(1) lookup of the solved action for a state."""
    return policy.action_for(state)


def policy_to_dict(policy: RoutingPolicy, config_hash: str) -> dict:
    """Exportable form of a solved policy, one entry per dense state index."""
    entries = []
    for state in all_states():
        entries.append(
            {
                "complexity": state.complexity.value,
                "device": state.device_class.value,
                "network": state.network.value,
                "battery": state.battery.value,
                "action": policy.action_for(state).value,
                "value": float(policy.values[state.index]),
            }
        )
    return {"config_hash": config_hash, "states": entries, "residual": policy.residual}


def policy_from_dict(doc: dict) -> tuple[RoutingPolicy, str]:
    """Inverse of policy_to_dict. Returns the policy and its config hash."""
    entries = doc["states"]
    if len(entries) != N_STATES:
        raise ValueError(f"policy document must carry {N_STATES} states")
    actions = np.zeros(N_STATES, dtype=np.int8)
    values = np.zeros(N_STATES)
    for entry in entries:
        state = RoutingState(
            Complexity(entry["complexity"]),
            DeviceClass(entry["device"]),
            NetworkState(entry["network"]),
            Battery(entry["battery"]),
        )
        actions[state.index] = ACTIONS.index(Action(entry["action"]))
        values[state.index] = entry["value"]
    return RoutingPolicy(actions=actions, values=values, residual=doc["residual"]), doc["config_hash"]


def save_policy(policy: RoutingPolicy, config_hash: str, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(policy_to_dict(policy, config_hash), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_policy(path) -> tuple[RoutingPolicy, str]:
    with open(path, encoding="utf-8") as fh:
        return policy_from_dict(json.load(fh))

"""Central configuration file: a restricted YAML subset, plus typed assembly.

The accepted grammar is scalars, nested maps, and lists of scalars,
selected by indentation, with `#` comments. YAML anchors, aliases, tags,
flow collections, directives, and multi-document markers are rejected so
that a config file means the same thing everywhere. Every setting has a
default; a file only overrides what it names. Unknown keys are errors.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field

import numpy as np

from .embedding import BandConfig
from .fusion import ContextSource, FusionWeights
from .routing import (
    Battery,
    Complexity,
    CostModel,
    DEFAULT_P_DRAIN,
    DeviceClass,
    DeviceProfile,
    NETWORK_STATES,
    NetworkModel,
    NetworkState,
)
from .simulate import PolicyKind, SimConfig
from .workload import KindRanges, TaskKind, WorkloadSpec


class ConfigError(Exception):
    pass


class ConfigParseError(ConfigError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


_INT_RE = re.compile(r"^[+-]?\d+$")
_FLOAT_RE = re.compile(r"^[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?$")
_KEY_RE = re.compile(r"^[A-Za-z0-9_.-]+$")
_FORBIDDEN_LEADS = "&*!{[|>%@`"


def _parse_scalar(text: str, lineno: int):
    text = text.strip()
    if not text:
        raise ConfigParseError("missing value", lineno)
    if text[0] in "\"'":
        quote = text[0]
        if len(text) < 2 or text[-1] != quote:
            raise ConfigParseError("unterminated quoted string", lineno)
        return text[1:-1]
    if text[0] in _FORBIDDEN_LEADS:
        raise ConfigParseError(
            f"value {text!r} uses an unsupported YAML feature (anchors, tags, and "
            "flow collections are not part of the accepted subset)",
            lineno,
        )
    if text in ("true", "false"):
        return text == "true"
    if text in ("null", "~"):
        return None
    if _INT_RE.match(text):
        return int(text)
    if _FLOAT_RE.match(text):
        return float(text)
    return text


def _strip_comment(line: str) -> str:
    in_quote: str | None = None
    for i, ch in enumerate(line):
        if in_quote:
            if ch == in_quote:
                in_quote = None
        elif ch in "\"'":
            in_quote = ch
        elif ch == "#" and (i == 0 or line[i - 1] in " \t"):
            return line[:i]
    return line


def parse_config_text(text: str) -> dict:
    """Parse the restricted config grammar into plain dicts/lists/scalars."""
    entries: list[tuple[int, int, str]] = []  # (lineno, indent, content)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw.strip().startswith("---"):
            raise ConfigParseError("multi-document files are not supported", lineno)
        line = _strip_comment(raw).rstrip()
        if not line.strip():
            continue
        stripped = line.lstrip(" ")
        indent = len(line) - len(stripped)
        if "\t" in line[: indent + 1]:
            raise ConfigParseError("tabs are not allowed for indentation", lineno)
        if stripped.startswith("%"):
            raise ConfigParseError("YAML directives are not supported", lineno)
        entries.append((lineno, indent, stripped))

    if not entries:
        return {}

    value, next_index = _parse_block(entries, 0, entries[0][1])
    if next_index != len(entries):
        raise ConfigParseError("inconsistent indentation", entries[next_index][0])
    if not isinstance(value, dict):
        raise ConfigParseError("top level must be a map", entries[0][0])
    return value


def _parse_block(entries, start: int, indent: int):
    lineno, first_indent, content = entries[start]
    if first_indent != indent:
        raise ConfigParseError("inconsistent indentation", lineno)
    if content.startswith("- ") or content == "-":
        return _parse_list(entries, start, indent)
    return _parse_map(entries, start, indent)


def _parse_list(entries, start: int, indent: int):
    items = []
    i = start
    while i < len(entries):
        lineno, item_indent, content = entries[i]
        if item_indent < indent:
            break
        if item_indent > indent:
            raise ConfigParseError("unexpected indentation inside list", lineno)
        if content == "-":
            raise ConfigParseError("list items must carry a scalar value", lineno)
        if not content.startswith("- "):
            break
        items.append(_parse_scalar(content[2:], lineno))
        i += 1
    return items, i


def _parse_map(entries, start: int, indent: int):
    mapping: dict = {}
    i = start
    while i < len(entries):
        lineno, item_indent, content = entries[i]
        if item_indent < indent:
            break
        if item_indent > indent:
            raise ConfigParseError("unexpected indentation", lineno)
        if content.startswith("- "):
            break
        if ":" not in content:
            raise ConfigParseError("expected 'key: value' or 'key:'", lineno)
        key, _, rest = content.partition(":")
        key = key.strip()
        if not _KEY_RE.match(key):
            raise ConfigParseError(f"invalid key {key!r}", lineno)
        if key in mapping:
            raise ConfigParseError(f"duplicate key {key!r}", lineno)
        rest = rest.strip()
        if rest:
            mapping[key] = _parse_scalar(rest, lineno)
            i += 1
            continue
        # nested block: everything more indented than this line
        if i + 1 < len(entries) and entries[i + 1][1] > item_indent:
            value, i = _parse_block(entries, i + 1, entries[i + 1][1])
            mapping[key] = value
        else:
            mapping[key] = None
            i += 1
    return mapping, i


def _checked(factory, label: str):
    """Run a dataclass constructor, converting validation errors."""
    try:
        return factory()
    except ValueError as err:
        raise ConfigError(f"{label}: {err}") from None


class _Section:
    """Typed reads over one config section with unknown-key detection."""

    def __init__(self, data: dict | None, name: str):
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError(f"section {name!r} must be a map")
        self.data = dict(data)
        self.name = name

    def take(self, key, default):
        return self.data.pop(key, default)

    def take_map(self, key) -> dict | None:
        value = self.data.pop(key, None)
        if value is not None and not isinstance(value, dict):
            raise ConfigError(f"{self.name}.{key} must be a map")
        return value

    def finish(self) -> None:
        if self.data:
            unknown = ", ".join(sorted(self.data))
            raise ConfigError(f"unknown keys in section {self.name!r}: {unknown}")


def _complexity_map(raw: dict | None, defaults: dict, name: str) -> dict:
    result = dict(defaults)
    if raw:
        for key, value in raw.items():
            try:
                result[Complexity(key)] = float(value)
            except ValueError:
                raise ConfigError(f"{name}: unknown complexity {key!r}") from None
    return result


@dataclass(eq=False)
class SimSettings:
    n_tasks: int = 1000
    seed: int = 42
    policy: PolicyKind = PolicyKind.MDP
    device: DeviceClass = DeviceClass.CPU_ONLY
    battery: Battery = Battery.OK
    initial_network: NetworkState = NetworkState.GOOD
    offline_timeout_ms: float = 10_000.0
    sub_second_ms: float = 1000.0


@dataclass(eq=False)
class AppConfig:
    device: DeviceProfile
    network: NetworkModel
    cost: CostModel
    tolerance: float
    p_drain: float
    complexity_mix: dict[Complexity, float]
    workload_spec: WorkloadSpec
    bands: BandConfig
    fusion_weights: FusionWeights
    max_files: int
    sim: SimSettings
    compare_policy_names: tuple[str, ...]

    def sim_config(self, policy: PolicyKind | None = None, seed: int | None = None,
                   n_tasks: int | None = None) -> SimConfig:
        device = DeviceProfile(
            device_class=self.sim.device,
            battery=self.sim.battery,
            edge_base_latency_ms=self.device.edge_base_latency_ms,
            edge_energy_units=self.device.edge_energy_units,
            edge_accuracy_loss=self.device.edge_accuracy_loss,
            cpu_latency_multiplier=self.device.cpu_latency_multiplier,
        )
        return SimConfig(
            n_tasks=self.sim.n_tasks if n_tasks is None else n_tasks,
            seed=self.sim.seed if seed is None else seed,
            policy=self.sim.policy if policy is None else policy,
            device=device,
            network=self.network,
            cost=self.cost,
            workload_spec=self.workload_spec,
            initial_network=self.sim.initial_network,
            p_drain=self.p_drain,
            complexity_mix=self.complexity_mix,
            offline_timeout_ms=self.sim.offline_timeout_ms,
            sub_second_ms=self.sim.sub_second_ms,
        )

    def router_fingerprint(self) -> str:
        """Hash of everything the solved policy depends on."""
        payload = {
            "w_latency": self.cost.w_latency,
            "w_energy": self.cost.w_energy,
            "w_accuracy": self.cost.w_accuracy,
            "discount_gamma": self.cost.discount_gamma,
            "tolerance": self.tolerance,
            "p_drain": self.p_drain,
            "complexity_mix": {c.value: self.complexity_mix[c] for c in Complexity},
            "edge_base_latency_ms": {c.value: self.device.edge_base_latency_ms[c] for c in Complexity},
            "edge_energy_units": {c.value: self.device.edge_energy_units[c] for c in Complexity},
            "edge_accuracy_loss": {c.value: self.device.edge_accuracy_loss[c] for c in Complexity},
            "cpu_latency_multiplier": self.device.cpu_latency_multiplier,
            "rtt_ms": {s.value: self.network.rtt_ms[s] for s in (NetworkState.GOOD, NetworkState.DEGRADED)},
            "cloud_compute_ms": {c.value: self.network.cloud_compute_ms[c] for c in Complexity},
            "cloud_energy_units": {c.value: self.network.cloud_energy_units[c] for c in Complexity},
            "transition_matrix": self.network.transition_matrix.tolist(),
        }
        blob = json.dumps(payload, sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def config_from_dict(data: dict) -> AppConfig:
    top = _Section(data, "<top>")

    router = _Section(top.take_map("router"), "router")
    base_device = DeviceProfile()
    cost = CostModel(
        w_latency=float(router.take("w_latency", 0.001)),
        w_energy=float(router.take("w_energy", 0.1)),
        w_accuracy=float(router.take("w_accuracy", 10.0)),
        discount_gamma=float(router.take("discount_gamma", 0.95)),
    )
    tolerance = float(router.take("tolerance", 1e-8))
    if tolerance <= 0:
        raise ConfigError("router.tolerance must be > 0")
    edge_latency = _complexity_map(
        router.take_map("edge_base_latency_ms"), base_device.edge_base_latency_ms, "router.edge_base_latency_ms"
    )
    edge_energy = _complexity_map(
        router.take_map("edge_energy_units"), base_device.edge_energy_units, "router.edge_energy_units"
    )
    edge_accuracy = _complexity_map(
        router.take_map("edge_accuracy_loss"), base_device.edge_accuracy_loss, "router.edge_accuracy_loss"
    )
    cpu_multiplier = float(router.take("cpu_latency_multiplier", 2.0))
    good_rtt = float(router.take("good_rtt_ms", 2400.0))
    degraded_factor = float(router.take("degraded_rtt_factor", 3.0))
    energy_ratio = float(router.take("cloud_energy_ratio", 3.8))
    cloud_compute = _complexity_map(
        router.take_map("cloud_compute_ms"),
        {Complexity.LOW: 100.0, Complexity.MEDIUM: 250.0, Complexity.HIGH: 600.0},
        "router.cloud_compute_ms",
    )
    cloud_energy_raw = router.take_map("cloud_energy_units")
    p_drain = float(router.take("p_drain", DEFAULT_P_DRAIN))
    complexity_mix = _complexity_map(
        router.take_map("complexity_mix"),
        {Complexity.LOW: 0.5, Complexity.MEDIUM: 0.4, Complexity.HIGH: 0.1},
        "router.complexity_mix",
    )
    router.finish()

    device = _checked(
        lambda: DeviceProfile(
            edge_base_latency_ms=edge_latency,
            edge_energy_units=edge_energy,
            edge_accuracy_loss=edge_accuracy,
            cpu_latency_multiplier=cpu_multiplier,
        ),
        "router",
    )
    cloud_energy = _complexity_map(
        cloud_energy_raw,
        {c: energy_ratio * edge_energy[c] for c in Complexity},
        "router.cloud_energy_units",
    )

    network_section = _Section(top.take_map("network"), "network")
    initial_network = NetworkState(network_section.take("initial_state", "good"))
    matrix_raw = network_section.take_map("transition_matrix")
    if matrix_raw is None:
        matrix = np.array([[0.92, 0.06, 0.02], [0.25, 0.70, 0.05], [0.30, 0.30, 0.40]])
    else:
        matrix = np.zeros((3, 3))
        for i, src in enumerate(NETWORK_STATES):
            row = matrix_raw.get(src.value)
            if not isinstance(row, dict):
                raise ConfigError(f"network.transition_matrix.{src.value} must be a map")
            for j, dst in enumerate(NETWORK_STATES):
                if dst.value not in row:
                    raise ConfigError(f"network.transition_matrix.{src.value} is missing {dst.value!r}")
                matrix[i, j] = float(row[dst.value])
    network_section.finish()
    network = _checked(
        lambda: NetworkModel(
            transition_matrix=matrix,
            rtt_ms={NetworkState.GOOD: good_rtt, NetworkState.DEGRADED: good_rtt * degraded_factor},
            cloud_compute_ms=cloud_compute,
            cloud_energy_units=cloud_energy,
        ),
        "network",
    )

    workload_section = _Section(top.take_map("workload"), "workload")
    default_spec = WorkloadSpec()
    mix = dict(default_spec.mix)
    mix_raw = workload_section.take_map("mix")
    if mix_raw:
        for key, value in mix_raw.items():
            try:
                mix[TaskKind(key)] = float(value)
            except ValueError:
                raise ConfigError(f"workload.mix: unknown task kind {key!r}") from None
    ranges = dict(default_spec.ranges)
    ranges_raw = workload_section.take_map("ranges")
    if ranges_raw:
        for key, value in ranges_raw.items():
            try:
                kind = TaskKind(key)
            except ValueError:
                raise ConfigError(f"workload.ranges: unknown task kind {key!r}") from None
            sub = _Section(value, f"workload.ranges.{key}")
            base = ranges[kind]
            ranges[kind] = KindRanges(
                files=(int(sub.take("files_min", base.files[0])), int(sub.take("files_max", base.files[1]))),
                deps=(int(sub.take("deps_min", base.deps[0])), int(sub.take("deps_max", base.deps[1]))),
                tokens=(int(sub.take("tokens_min", base.tokens[0])), int(sub.take("tokens_max", base.tokens[1]))),
            )
            sub.finish()
    inter_arrival = float(workload_section.take("inter_arrival_mean_s", default_spec.inter_arrival_mean_s))
    workload_section.finish()
    workload_spec = _checked(
        lambda: WorkloadSpec(mix=mix, ranges=ranges, inter_arrival_mean_s=inter_arrival), "workload"
    )

    embed_section = _Section(top.take_map("embed"), "embed")
    default_bands = BandConfig()
    bands = _checked(
        lambda: BandConfig(
            structural_dims=int(embed_section.take("structural_dims", default_bands.structural_dims)),
            identifier_dims=int(embed_section.take("identifier_dims", default_bands.identifier_dims)),
            literal_dims=int(embed_section.take("literal_dims", default_bands.literal_dims)),
            identifier_weight=float(embed_section.take("identifier_weight", default_bands.identifier_weight)),
            wl_iterations=int(embed_section.take("wl_iterations", default_bands.wl_iterations)),
            hash_seed=int(embed_section.take("hash_seed", default_bands.hash_seed)),
        ),
        "embed",
    )
    embed_section.finish()

    fusion_section = _Section(top.take_map("fusion"), "fusion")
    default_fusion = FusionWeights()
    priors = dict(default_fusion.prior)
    priors_raw = fusion_section.take_map("priors")
    if priors_raw:
        for key, value in priors_raw.items():
            try:
                priors[ContextSource(key)] = float(value)
            except ValueError:
                raise ConfigError(f"fusion.priors: unknown source {key!r}") from None
    fusion_weights = _checked(
        lambda: FusionWeights(
            prior=priors,
            temperature=float(fusion_section.take("temperature", default_fusion.temperature)),
            recency_half_life_s=float(
                fusion_section.take("recency_half_life_s", default_fusion.recency_half_life_s)
            ),
            breakpoint_boost=float(fusion_section.take("breakpoint_boost", default_fusion.breakpoint_boost)),
        ),
        "fusion",
    )
    fusion_section.finish()

    index_section = _Section(top.take_map("index"), "index")
    max_files = int(index_section.take("max_files", 500))
    if max_files < 0:
        raise ConfigError("index.max_files must be >= 0")
    index_section.finish()

    sim_section = _Section(top.take_map("simulate"), "simulate")
    try:
        sim = SimSettings(
            n_tasks=int(sim_section.take("n_tasks", 1000)),
            seed=int(sim_section.take("seed", 42)),
            policy=PolicyKind(sim_section.take("policy", "mdp")),
            device=DeviceClass(sim_section.take("device", "cpu")),
            battery=Battery(sim_section.take("battery", "ok")),
            initial_network=initial_network,
            offline_timeout_ms=float(sim_section.take("offline_timeout_ms", 10_000.0)),
            sub_second_ms=float(sim_section.take("sub_second_ms", 1000.0)),
        )
    except ValueError as err:
        raise ConfigError(f"simulate: {err}") from None
    sim_section.finish()

    compare_section = _Section(top.take_map("compare"), "compare")
    policy_names = compare_section.take("policies", None)
    if policy_names is None:
        policy_names = [k.value for k in PolicyKind]
    if not isinstance(policy_names, list) or not policy_names:
        raise ConfigError("compare.policies must be a non-empty list")
    for name in policy_names:
        try:
            PolicyKind(name)
        except ValueError:
            raise ConfigError(f"compare.policies: unknown policy {name!r}") from None
    compare_section.finish()

    top.finish()

    try:
        return AppConfig(
            device=device,
            network=network,
            cost=cost,
            tolerance=tolerance,
            p_drain=p_drain,
            complexity_mix=complexity_mix,
            workload_spec=workload_spec,
            bands=bands,
            fusion_weights=fusion_weights,
            max_files=max_files,
            sim=sim,
            compare_policy_names=tuple(policy_names),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from None


def load_config(path: str | None = None) -> AppConfig:
    """Build the application config; with no file every default applies."""
    if path is None:
        return config_from_dict({})
    with open(path, encoding="utf-8") as fh:
        data = parse_config_text(fh.read())
    try:
        return config_from_dict(data)
    except ValueError as err:
        raise ConfigError(str(err)) from None

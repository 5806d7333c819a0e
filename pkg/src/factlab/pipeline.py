"""Config-driven pipeline engine with a plugin solver registry.

Solvers are registered once (typically at import time) and are shared
read-only across runs. A pipeline is described declaratively: an ordered
list of solver specs whose output/input names must chain, plus an optional
start index so verification can begin at any stage when earlier values are
already available. Execution is strictly sequential within a run; each
solver returns a success flag, and the first failure aborts the run.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Callable, Mapping

import yaml

from .errors import (
    ChainMismatchError,
    ConfigParseError,
    FactLabError,
    MissingInputError,
    RegistrationError,
    SolverFailure,
    UnknownSolverError,
)
from .state import FactState, LedgerEntry

log = logging.getLogger(__name__)

SCALAR_TYPES = (str, int, float, bool)


class Stage(str, Enum):
    """The three pipeline stages a solver can implement."""

    CLAIM_PROCESSOR = "claim_processor"
    RETRIEVER = "retriever"
    VERIFIER = "verifier"


@dataclass
class SolverResult:
    """Outcome of one solver execution: success flag plus the carried state."""

    success: bool
    state: FactState
    error_message: str | None = None

    def __post_init__(self):
        if not self.success and not self.error_message:
            raise ValueError("a failed SolverResult must carry an error_message")

    @classmethod
    def ok(cls, state: FactState) -> "SolverResult":
        return cls(success=True, state=state)

    @classmethod
    def failed(cls, state: FactState, message: str) -> "SolverResult":
        return cls(success=False, state=state, error_message=message)


@dataclass(frozen=True)
class SolverSpec:
    """One configured pipeline step: which solver runs and under which names."""

    name: str
    stage: Stage
    input_name: str
    output_name: str
    params: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class PipelineConfig:
    solvers: tuple[SolverSpec, ...]
    start_index: int = 0

    def with_start(self, start_index: int) -> "PipelineConfig":
        return replace(self, start_index=start_index)


@dataclass(frozen=True)
class ChainMismatch:
    """First boundary where adjacent solvers disagree on the value name.

    ``position`` is the index of the downstream solver whose input did not
    match the upstream output.
    """

    position: int
    output_name: str
    input_name: str


# A solver is built from its config params once per run, then invoked with
# the run state and its own spec (for the configured names and cost booking).
SolverFn = Callable[[FactState, SolverSpec], SolverResult]
SolverFactory = Callable[[Mapping[str, Any]], SolverFn]


@dataclass(frozen=True)
class SolverDescriptor:
    """Registration record: identity, stage, default IO names, and factory."""

    name: str
    stage: Stage
    input_name: str
    output_name: str
    factory: SolverFactory


class SolverRegistry:
    """Name-indexed solver plugins; read-shared across concurrent runs."""

    def __init__(self):
        self._descriptors: dict[str, SolverDescriptor] = {}

    def register(self, descriptor: SolverDescriptor) -> SolverDescriptor:
        """Insert a descriptor; re-registering a name replaces and warns."""
        for attr in ("name", "input_name", "output_name"):
            value = getattr(descriptor, attr, None)
            if not value or not isinstance(value, str):
                raise RegistrationError(f"descriptor is missing {attr}")
        if not isinstance(descriptor.stage, Stage):
            raise RegistrationError(
                f"descriptor {descriptor.name!r} has invalid stage "
                f"{descriptor.stage!r}"
            )
        if not callable(descriptor.factory):
            raise RegistrationError(
                f"descriptor {descriptor.name!r} has no callable factory"
            )
        if descriptor.name in self._descriptors:
            log.warning("re-registering solver %r: replacing previous entry",
                        descriptor.name)
        self._descriptors[descriptor.name] = descriptor
        return descriptor

    def solver(
        self,
        name: str,
        stage: Stage,
        input_name: str,
        output_name: str,
    ) -> Callable[[SolverFactory], SolverFactory]:
        """Decorator form of :meth:`register` for factory functions."""

        def wrap(factory: SolverFactory) -> SolverFactory:
            self.register(
                SolverDescriptor(
                    name=name,
                    stage=stage,
                    input_name=input_name,
                    output_name=output_name,
                    factory=factory,
                )
            )
            return factory

        return wrap

    def get(self, name: str) -> SolverDescriptor:
        try:
            return self._descriptors[name]
        except KeyError:
            raise UnknownSolverError(f"solver {name!r} is not registered") from None

    def __contains__(self, name: str) -> bool:
        return name in self._descriptors

    def names(self) -> list[str]:
        return sorted(self._descriptors)

    def by_stage(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {stage.value: [] for stage in Stage}
        for name in sorted(self._descriptors):
            out[self._descriptors[name].stage.value].append(name)
        return out


DEFAULT_REGISTRY = SolverRegistry()

register_solver = DEFAULT_REGISTRY.register


_CONFIG_KEYS = {"solvers", "start_index"}
_SPEC_KEYS = {"name", "stage", "input_name", "output_name", "params"}


def load_pipeline_config(
    source: str, registry: SolverRegistry | None = None
) -> PipelineConfig:
    """Parse a pipeline config document and resolve it against the registry.

    The format is a mapping with a ``solvers`` sequence and an optional
    ``start_index``. Unknown keys are rejected rather than ignored, both at
    the top level and inside each solver entry.
    """
    registry = registry if registry is not None else DEFAULT_REGISTRY
    try:
        data = yaml.safe_load(source)
    except yaml.YAMLError as exc:
        raise ConfigParseError(f"config does not parse: {exc}") from exc
    if not isinstance(data, Mapping):
        raise ConfigParseError("config must be a mapping")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigParseError(f"unknown config keys: {sorted(unknown)}")
    raw_solvers = data.get("solvers")
    if not isinstance(raw_solvers, list) or not raw_solvers:
        raise ConfigParseError("config must list at least one solver")

    specs: list[SolverSpec] = []
    seen: set[str] = set()
    for index, item in enumerate(raw_solvers):
        if not isinstance(item, Mapping):
            raise ConfigParseError(f"solver entry {index} must be a mapping")
        unknown = set(item) - _SPEC_KEYS
        if unknown:
            raise ConfigParseError(
                f"solver entry {index} has unknown keys: {sorted(unknown)}"
            )
        name = item.get("name")
        if not isinstance(name, str) or not name:
            raise ConfigParseError(f"solver entry {index} is missing a name")
        if name in seen:
            raise ConfigParseError(f"duplicate solver name {name!r}")
        seen.add(name)
        descriptor = registry.get(name)
        stage = descriptor.stage
        if "stage" in item:
            try:
                stage = Stage(item["stage"])
            except ValueError:
                raise ConfigParseError(
                    f"solver {name!r} has invalid stage {item['stage']!r}"
                ) from None
            if stage is not descriptor.stage:
                raise ConfigParseError(
                    f"solver {name!r} is registered for stage "
                    f"{descriptor.stage.value!r}, config says {stage.value!r}"
                )
        params = item.get("params", {})
        if params is None:
            params = {}
        if not isinstance(params, Mapping):
            raise ConfigParseError(f"solver {name!r} params must be a mapping")
        for key, value in params.items():
            if not isinstance(value, SCALAR_TYPES):
                raise ConfigParseError(
                    f"solver {name!r} param {key!r} must be a scalar"
                )
        specs.append(
            SolverSpec(
                name=name,
                stage=stage,
                input_name=str(item.get("input_name", descriptor.input_name)),
                output_name=str(item.get("output_name", descriptor.output_name)),
                params=dict(params),
            )
        )

    start_index = data.get("start_index", 0)
    if not isinstance(start_index, int) or isinstance(start_index, bool):
        raise ConfigParseError("start_index must be an integer")
    if start_index < 0 or start_index >= len(specs):
        raise ConfigParseError(
            f"start_index {start_index} out of range for {len(specs)} solvers"
        )
    return PipelineConfig(solvers=tuple(specs), start_index=start_index)


def load_pipeline_config_file(
    path, registry: SolverRegistry | None = None
) -> PipelineConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return load_pipeline_config(fh.read(), registry)


def validate_chain(config: PipelineConfig) -> ChainMismatch | None:
    """Check that every adjacent pair chains output name -> input name.

    Returns None when the chain is valid, otherwise the first mismatch.
    A single-solver pipeline is vacuously valid.
    """
    for i in range(len(config.solvers) - 1):
        upstream, downstream = config.solvers[i], config.solvers[i + 1]
        if upstream.output_name != downstream.input_name:
            return ChainMismatch(
                position=i + 1,
                output_name=upstream.output_name,
                input_name=downstream.input_name,
            )
    return None


def run_pipeline(
    state: FactState,
    config: PipelineConfig,
    registry: SolverRegistry | None = None,
) -> FactState:
    """Execute ``config.solvers[start_index:]`` over a copy of ``state``.

    Wall time is booked into the ledger for every executed solver, including
    a failing one. On failure a :class:`SolverFailure` is raised identifying
    the solver and stage; it carries the partial state so values written by
    earlier solvers stay inspectable.
    """
    registry = registry if registry is not None else DEFAULT_REGISTRY
    mismatch = validate_chain(config)
    if mismatch is not None:
        raise ChainMismatchError(
            mismatch.position, mismatch.output_name, mismatch.input_name
        )
    descriptors = [registry.get(spec.name) for spec in config.solvers]

    start = config.start_index
    if start > 0:
        required = config.solvers[start].input_name
        if not state.has(required):
            raise MissingInputError(
                f"state is missing entry {required!r} required to start at "
                f"solver {start} ({config.solvers[start].name!r})"
            )

    state = state.clone()
    for spec, descriptor in zip(config.solvers[start:], descriptors[start:]):
        started = time.perf_counter()
        try:
            solver = descriptor.factory(spec.params)
            result = solver(state, spec)
        except FactLabError as exc:
            result = SolverResult.failed(state, str(exc))
        elapsed = time.perf_counter() - started

        state = result.state
        entry = state.ledger.setdefault(spec.name, LedgerEntry())
        entry.wall_time_seconds = elapsed

        if not result.success:
            raise SolverFailure(
                spec.name, spec.stage.value, result.error_message or "failed", state
            )
        if not state.has(spec.output_name):
            raise SolverFailure(
                spec.name,
                spec.stage.value,
                f"did not produce output entry {spec.output_name!r}",
                state,
            )
        state.validate()
    return state

r"""Trace format, validation, deterministic replay, and bundled fixtures.

Wire format is JSONL: one event object per line, UTF-8. Every event carries a
strictly increasing ``seq`` and an ``op``; remaining fields depend on the op:

    {"seq": 1, "op": "load_long_list", "names": ["\\RPC Control\\ntsvcs"]}
    {"seq": 2, "op": "vm_create", "ip": "10.0.0.2"}
    {"seq": 3, "op": "spawn", "vm": 1}
    {"seq": 4, "op": "create", "actor": 1, "name": "\\RPC Control\\epmapper",
     "category": "I_Port", "scope": "Local",
     "expect": {"route": "VmPrivate"}}

VM ids and pids are assigned deterministically in event order (1, 2, 3, ...),
so traces reference them literally. An optional ``expect`` clause asserts on
the outcome: ``route`` / ``effective_name`` (create, open), ``decision``
(send, remote_thread, find_window, set_hook), or ``error`` (any op).

Original names whose first component matches ``vm<digits>`` collide with the
rename image space and are rejected by validation.
"""

from __future__ import annotations

import concurrent.futures
import json
import logging
import random
from dataclasses import dataclass, field, fields

from .engine import (
    ConfinementEngine,
    EngineCounters,
    EngineSnapshot,
    ReferenceEngine,
    Route,
)
from .errors import (
    ConfinementError,
    InvalidHandle,
    InvalidParams,
    KernelError,
    ParseError,
    ReplayError,
    ValidationError,
)
from .kernel import Delivery, HookScope, SimKernel
from .errors import InvalidName
from .model import (
    Intent,
    IpcCategory,
    Scope,
    VmId,
    VmRegistry,
    check_object_name,
    has_reserved_vm_prefix,
)

logger = logging.getLogger(__name__)

__all__ = [
    "TraceEvent",
    "ReplayReport",
    "Replayer",
    "parse_trace",
    "serialize_trace",
    "validate_events",
    "replay",
    "stress_replay",
    "fixture_rpcss",
    "fixture_three_iis",
    "TraceParams",
    "generate_random_trace",
    "first_post_seal_host_touches",
    "RPCSS_LONG_LIST",
    "RPCSS_ISOLATION",
    "RPCSS_GLOBAL",
    "RPCSS_HOST_OBJECTS",
]

OPS = {
    "load_long_list", "vm_create", "spawn", "create", "open", "close",
    "send", "register_window", "find_window", "remote_thread", "set_hook",
    "bind", "seal",
}

# op -> (required fields, optional fields); seq/op/expect handled separately
_FIELDS = {
    "load_long_list": ({"names"}, set()),
    "vm_create": ({"ip"}, set()),
    "spawn": ({"vm"}, set()),
    "create": ({"actor", "name", "category"}, {"scope"}),
    "open": ({"actor", "name", "category"}, set()),
    "close": ({"actor", "name"}, set()),
    "send": ({"actor", "target"}, {"subtype", "payload"}),
    "register_window": ({"actor", "class_name"}, set()),
    "find_window": ({"actor", "class_name"}, set()),
    "remote_thread": ({"actor", "target"}, set()),
    "set_hook": ({"actor", "hook_scope"}, set()),
    "bind": ({"actor", "ip", "port"}, set()),
    "seal": (set(), set()),
}

_EXPECT_KEYS = {"route", "decision", "effective_name", "error"}

# Errors that are normal, assertable outcomes of an op contract; anything
# else raised during replay is a precondition violation and aborts the run
# unless the event expects it.
_OUTCOME_ERRORS = {"NotFound", "AlreadyExists", "CategoryMismatch", "AddressInUse"}


@dataclass(frozen=True)
class TraceEvent:
    seq: int
    op: str
    actor: int | None = None
    vm: int | None = None
    ip: str | None = None
    port: int | None = None
    name: str | None = None
    names: tuple[str, ...] | None = None
    category: str | None = None
    scope: str | None = None
    target: int | None = None
    subtype: str | None = None
    payload: str | None = None
    class_name: str | None = None
    hook_scope: str | None = None
    expect: dict | None = None

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if f.name == "names":
                value = list(value)
            out[f.name] = value
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TraceEvent":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown fields: {sorted(unknown)}")
        payload = dict(data)
        if "names" in payload and payload["names"] is not None:
            payload["names"] = tuple(payload["names"])
        return cls(**payload)


def serialize_trace(events) -> str:
    return "".join(json.dumps(e.to_dict(), sort_keys=True) + "\n" for e in events)


def parse_trace(text: str) -> list[TraceEvent]:
    """Parse and validate a JSONL trace."""
    events = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"bad JSON: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ParseError(lineno, "event must be a JSON object")
        try:
            events.append(TraceEvent.from_dict(data))
        except (TypeError, ValueError) as exc:
            raise ParseError(lineno, str(exc)) from None
    validate_events(events)
    return events


def validate_events(events) -> None:
    last_seq = 0
    for event in events:
        seq = event.seq
        if not isinstance(seq, int) or seq <= last_seq:
            raise ValidationError(seq if isinstance(seq, int) else -1,
                                  f"seq must be a strictly increasing positive integer (after {last_seq})")
        last_seq = seq
        _validate_event(event)


def _validate_event(event: TraceEvent) -> None:
    seq = event.seq
    if event.op not in OPS:
        raise ValidationError(seq, f"unknown op {event.op!r}")
    required, optional = _FIELDS[event.op]
    payload_fields = {f.name for f in fields(TraceEvent)} - {"seq", "op", "expect"}
    present = {name for name in payload_fields if getattr(event, name) is not None}
    missing = required - present
    if missing:
        raise ValidationError(seq, f"{event.op} requires {sorted(missing)}")
    extra = present - required - optional
    if extra:
        raise ValidationError(seq, f"{event.op} does not take {sorted(extra)}")

    if event.op == "load_long_list":
        for name in event.names:
            _check_trace_name(seq, name, allow_pattern=True)
    if event.name is not None:
        _check_trace_name(seq, event.name)
    if event.category is not None:
        try:
            category = IpcCategory.parse(event.category)
        except ValueError as exc:
            raise ValidationError(seq, str(exc)) from None
        if event.op in ("create", "open") and not category.name_addressed:
            raise ValidationError(seq, f"{event.op} takes a name-addressed category, got {event.category}")
    if event.scope is not None and event.scope not in ("Local", "Global"):
        raise ValidationError(seq, f"bad scope {event.scope!r}")
    if event.hook_scope is not None and event.hook_scope not in ("SystemWide", "OwnVm"):
        raise ValidationError(seq, f"bad hook_scope {event.hook_scope!r}")
    if event.port is not None and not isinstance(event.port, int):
        raise ValidationError(seq, "port must be an integer")
    if event.vm is not None and (not isinstance(event.vm, int) or event.vm < 0):
        raise ValidationError(seq, "vm must be a non-negative integer")
    for label in ("actor", "target"):
        value = getattr(event, label)
        if value is not None and (not isinstance(value, int) or value < 1):
            raise ValidationError(seq, f"{label} must be a positive pid")

    if event.expect is not None:
        if not isinstance(event.expect, dict):
            raise ValidationError(seq, "expect must be an object")
        unknown = set(event.expect) - _EXPECT_KEYS
        if unknown:
            raise ValidationError(seq, f"unknown expect keys {sorted(unknown)}")
        route = event.expect.get("route")
        if route is not None and route not in {r.value for r in Route}:
            raise ValidationError(seq, f"bad expect.route {route!r}")
        decision = event.expect.get("decision")
        if decision is not None and decision not in ("Allow", "Deny"):
            raise ValidationError(seq, f"bad expect.decision {decision!r}")


def _check_trace_name(seq: int, name: str, allow_pattern: bool = False) -> None:
    try:
        check_object_name(name, allow_pattern=allow_pattern)
    except InvalidName as exc:
        raise ValidationError(seq, str(exc)) from None
    if has_reserved_vm_prefix(name):
        raise ValidationError(seq, f"reserved vm-prefix name {name!r}")


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------

@dataclass
class ReplayReport:
    events_run: int = 0
    assertions_passed: int = 0
    assertions_failed: list = field(default_factory=list)
    counters: EngineCounters = field(default_factory=EngineCounters)
    divergences: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.assertions_failed and not self.divergences

    def to_dict(self) -> dict:
        return {
            "events_run": self.events_run,
            "assertions_passed": self.assertions_passed,
            "assertions_failed": self.assertions_failed,
            "counters": self.counters.to_dict(),
            "divergences": self.divergences,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


class Replayer:
    """Executes a validated event list against a fresh engine + kernel.

    In dual mode the reference oracle is driven in lockstep over every
    name resolution and any outcome divergence is recorded. Replay is
    deterministic: identical input yields identical reports.
    """

    def __init__(self, dual: bool = False):
        self.dual = dual
        self.registry = VmRegistry()
        self.engine = ConfinementEngine()
        self.kernel = SimKernel(self.registry, self.engine)
        self.reference = ReferenceEngine() if dual else None
        self.outcomes: list[dict] = []
        self.seal_snapshot: EngineSnapshot | None = None
        # (actor pid, original name) -> stack of open handles
        self._handles: dict[tuple[int, str], list] = {}
        self._divergences: list[dict] = []

    def run(self, events) -> ReplayReport:
        report = ReplayReport()
        for event in events:
            result = self._execute(event)
            self.outcomes.append(result)
            report.events_run += 1
            if event.expect is not None:
                diffs = self._check_expect(event.expect, result)
                if diffs:
                    report.assertions_failed.append({"seq": event.seq, "diffs": diffs})
                else:
                    report.assertions_passed += 1
        report.counters = self.engine.counters.copy()
        report.divergences = list(self._divergences)
        if not report.counters.conservation_holds():
            raise AssertionError(f"counter conservation violated: {report.counters}")
        return report

    def _execute(self, event: TraceEvent) -> dict:
        result = {"seq": event.seq, "op": event.op}
        try:
            self._dispatch(event, result)
        except ConfinementError as exc:
            result["error"] = exc.code
            if isinstance(exc, KernelError) and exc.outcome is not None:
                result.update(exc.outcome.to_dict())
                self._compare_reference(event, exc.outcome)
            expected = (event.expect or {}).get("error")
            if expected is None and exc.code not in _OUTCOME_ERRORS:
                raise ReplayError(event.seq, f"{exc.code}: {exc}") from exc
        return result

    def _dispatch(self, event: TraceEvent, result: dict) -> None:
        op = event.op
        if op == "load_long_list":
            count = self.engine.load_long_list(event.names)
            if self.reference is not None:
                self.reference.load_long_list(event.names)
            result["loaded"] = count
        elif op == "vm_create":
            vm = self.registry.vm_create(event.ip)
            result["vm"] = vm.id
        elif op == "spawn":
            proc = self.registry.process_spawn(VmId(event.vm))
            result["pid"] = proc.pid
        elif op == "create":
            caller = self.registry.process(event.actor)
            category = IpcCategory.parse(event.category)
            scope = Scope(event.scope) if event.scope else Scope.LOCAL
            handle = self.kernel.create_object(caller, event.name, category, scope)
            self._handles.setdefault((event.actor, event.name), []).append(handle)
            result.update(handle.outcome.to_dict())
            self._compare_reference(event, handle.outcome)
        elif op == "open":
            caller = self.registry.process(event.actor)
            category = IpcCategory.parse(event.category)
            handle = self.kernel.open_object(caller, event.name, category)
            self._handles.setdefault((event.actor, event.name), []).append(handle)
            result.update(handle.outcome.to_dict())
            self._compare_reference(event, handle.outcome)
        elif op == "close":
            stack = self._handles.get((event.actor, event.name)) or []
            if not stack:
                raise InvalidHandle(f"pid {event.actor} has no open handle for {event.name}")
            handle = stack.pop()
            self.kernel.close(handle)
        elif op == "send":
            sender = self.registry.process(event.actor)
            target = self.registry.process(event.target)
            payload = (event.payload or "").encode()
            outcome = self.kernel.send_message(sender, target,
                                               event.subtype or "WindowsMessage", payload)
            result["delivery"] = outcome.value
            result["decision"] = "Allow" if outcome is Delivery.DELIVERED else "Deny"
        elif op == "register_window":
            owner = self.registry.process(event.actor)
            self.kernel.register_window(owner, event.class_name)
        elif op == "find_window":
            caller = self.registry.process(event.actor)
            found = self.kernel.find_window(caller, event.class_name)
            result["found"] = found is not None
            result["decision"] = "Allow" if found is not None else "Deny"
        elif op == "remote_thread":
            caller = self.registry.process(event.actor)
            target = self.registry.process(event.target)
            verdict = self.kernel.create_remote_thread(caller, target)
            result["decision"] = verdict.decision.value
            result["reason"] = verdict.reason
        elif op == "set_hook":
            caller = self.registry.process(event.actor)
            grant = self.kernel.set_hook(caller, HookScope(event.hook_scope))
            result["decision"] = "Allow"
            result["effective_vm"] = grant.effective_vm.id
            result["narrowed"] = grant.narrowed
        elif op == "bind":
            caller = self.registry.process(event.actor)
            binding = self.kernel.bind_socket(caller, event.ip, event.port)
            result["effective_ip"], result["effective_port"] = binding.effective
        elif op == "seal":
            self.engine.seal_host_objects()
            if self.reference is not None:
                self.reference.seal_host_objects()
            self.seal_snapshot = self.engine.snapshot()
        else:  # pragma: no cover - validation rejects unknown ops
            raise ReplayError(event.seq, f"unknown op {op!r}")

    def _compare_reference(self, event: TraceEvent, outcome) -> None:
        if self.reference is None:
            return
        caller = self.registry.process(event.actor)
        category = IpcCategory.parse(event.category)
        intent = Intent.CREATE if event.op == "create" else Intent.OPEN
        scope = Scope(event.scope) if event.scope else Scope.LOCAL
        ref = self.reference.resolve(caller, event.name, category, intent, scope)
        if ref != outcome:
            self._divergences.append({
                "seq": event.seq,
                "name": event.name,
                "engine": outcome.to_dict(),
                "reference": ref.to_dict(),
            })

    def _check_expect(self, expect: dict, result: dict) -> list[dict]:
        diffs = []
        for key in ("route", "decision", "effective_name"):
            if key in expect:
                actual = result.get(key)
                if actual != expect[key]:
                    diffs.append({"field": key, "expected": expect[key], "actual": actual})
        expected_error = expect.get("error")
        actual_error = result.get("error")
        if actual_error != expected_error:
            diffs.append({"field": "error", "expected": expected_error,
                          "actual": actual_error})
        return diffs


def replay(events, dual: bool = False) -> ReplayReport:
    """Replay a validated event list; see :class:`Replayer`."""
    return Replayer(dual=dual).run(events)


def stress_replay(events, max_workers: int = 8) -> EngineSnapshot:
    """Replay with actor events fanned out across worker threads.

    Global events (``load_long_list``, ``vm_create``, ``spawn``, ``seal``)
    act as barriers executed serially; between barriers, each actor's events
    run in order on that actor's worker while different actors interleave
    freely. Outcomes are racy by design; expect clauses are ignored. Returns
    the final engine snapshot for invariant checking.
    """
    replayer = Replayer(dual=False)
    barriers = {"load_long_list", "vm_create", "spawn", "seal"}
    segment: dict[int, list[TraceEvent]] = {}

    def flush():
        if not segment:
            return
        groups = list(segment.values())
        segment.clear()
        with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as pool:
            def run_group(group):
                for ev in group:
                    try:
                        replayer._execute(ev)
                    except ReplayError:
                        pass  # racy NotFound/ordering artifacts are expected here
            list(pool.map(run_group, groups))

    for event in events:
        if event.op in barriers or event.actor is None:
            flush()
            replayer._execute(event)
        else:
            segment.setdefault(event.actor, []).append(event)
    flush()
    return replayer.engine.snapshot()


# ---------------------------------------------------------------------------
# bundled fixtures
# ---------------------------------------------------------------------------

_PORT = "I_Port"
_PIPE = "II_PseudoFile:NamedPipe"
_SECTION = "III_SharedMemory:Section"
_MUTEX = "IV_Sync:Mutex"
_EVENT = "IV_Sync:Event"

# RPCSS service inventory: object name -> category, grouped by the
# confinement principle that governs it.
RPCSS_ISOLATION = (
    (r"\RPC Control\epmapper", _PORT),
    (r"\RPC Control\OLE30778CF8A8F24282B5F73ADC0B14", _PORT),
    (r"\Device\NamedPipe\epmapper", _PIPE),
    (r"\Device\NamedPipe\Winsock2\CatalogChangeListener-30c-0", _PIPE),
)

RPCSS_GLOBAL = (
    (r"\BaseNamedObjects\Global\RotHintTable", _SECTION),
)

# Concrete host objects plus the control-pipe instance that matches the
# wildcard long-list entry.
RPCSS_HOST_OBJECTS = (
    (r"\RPC Control\DNSResolver", _PORT),
    (r"\RPC Control\ntsvcs", _PORT),
    (r"\Device\NamedPipe\net\NtControlPipe1", _PIPE),
    (r"\Device\NamedPipe\svcsctl", _PIPE),
    (r"\Device\NamedPipe\ntsvcs", _PIPE),
    (r"\Device\NamedPipe\EVENTLOG", _PIPE),
    (r"\BaseNamedObjects\DBWinMutex", _MUTEX),
    (r"\BaseNamedObjects\RasPbFile", _MUTEX),
    (r"\BaseNamedObjects\_R_00000000da_SMem_", _SECTION),
    (r"\BaseNamedObjects\DBWIN_BUFFER", _SECTION),
    (r"\BaseNamedObjects\ScmCreatedEvent", _EVENT),
    (r"\SECURITY\LSA_AUTHENTICATION_INITIALIZED", _EVENT),
)

RPCSS_LONG_LIST = tuple(
    name for name, _ in RPCSS_HOST_OBJECTS
    if name != r"\Device\NamedPipe\net\NtControlPipe1"
) + (r"\Device\NamedPipe\net\NtControlPipe*",)


def fixture_rpcss() -> list[TraceEvent]:
    """The RPCSS inventory scenario.

    A host service process creates the host objects named on the long list;
    a virtualized RPCSS process in vm1 then creates its private and global
    objects and opens every host object, and the table is sealed. Every
    event carries the route its principle dictates.
    """
    events = []
    seq = 0

    def emit(op, **kwargs):
        nonlocal seq
        seq += 1
        events.append(TraceEvent(seq=seq, op=op, **kwargs))

    emit("load_long_list", names=RPCSS_LONG_LIST)
    emit("vm_create", ip="10.0.0.2")
    emit("spawn", vm=0)   # pid 1: host services
    emit("spawn", vm=1)   # pid 2: virtualized RPCSS

    for name, category in RPCSS_HOST_OBJECTS:
        emit("create", actor=1, name=name, category=category,
             expect={"route": "HostPassthrough", "effective_name": name})

    for name, category in RPCSS_ISOLATION:
        emit("create", actor=2, name=name, category=category,
             expect={"route": "VmPrivate", "effective_name": "\\vm1" + name})

    for name, category in RPCSS_GLOBAL:
        emit("create", actor=2, name=name, category=category, scope="Global",
             expect={"route": "VmGlobal", "effective_name": "\\vm1" + name})
        emit("open", actor=2, name=name, category=category,
             expect={"route": "VmGlobal", "effective_name": "\\vm1" + name})

    for name, category in RPCSS_HOST_OBJECTS:
        emit("open", actor=2, name=name, category=category,
             expect={"route": "HostPassthrough", "effective_name": name})

    emit("seal")
    validate_events(events)
    return events


def fixture_three_iis() -> list[TraceEvent]:
    """Three virtualized web-server instances on one simulated OS.

    Each VM binds port 80 on its own alias IP and builds an identically
    named service namespace; cross-VM opens and messages must fail.
    """
    events = []
    seq = 0

    def emit(op, **kwargs):
        nonlocal seq
        seq += 1
        events.append(TraceEvent(seq=seq, op=op, **kwargs))

    ips = ("10.0.0.2", "10.0.0.3", "10.0.0.4")
    service_objects = (
        (r"\RPC Control\epmapper", _PORT),
        (r"\Device\NamedPipe\iisadmin", _PIPE),
        (r"\BaseNamedObjects\IisWebContent", _SECTION),
    )

    emit("load_long_list", names=())
    for ip in ips:
        emit("vm_create", ip=ip)
    for vm in (1, 2, 3):
        emit("spawn", vm=vm)   # pid == vm number

    for pid in (1, 2, 3):
        emit("bind", actor=pid, ip="0.0.0.0", port=80)
        for name, category in service_objects:
            emit("create", actor=pid, name=name, category=category,
                 expect={"route": "VmPrivate",
                         "effective_name": f"\\vm{pid}" + name})
        emit("create", actor=pid, name=rf"\Device\NamedPipe\site-{pid}",
             category=_PIPE,
             expect={"route": "VmPrivate",
                     "effective_name": f"\\vm{pid}\\Device\\NamedPipe\\site-{pid}"})

    # the shared service names each resolve to the opener's own copy ...
    for pid in (1, 2, 3):
        emit("open", actor=pid, name=r"\Device\NamedPipe\iisadmin",
             category=_PIPE,
             expect={"route": "VmPrivate",
                     "effective_name": f"\\vm{pid}\\Device\\NamedPipe\\iisadmin"})
    # ... while another instance's unique names are unreachable
    for pid in (1, 2, 3):
        for other in (1, 2, 3):
            if other != pid:
                emit("open", actor=pid, name=rf"\Device\NamedPipe\site-{other}",
                     category=_PIPE, expect={"error": "NotFound"})

    # messages stay inside a VM
    emit("send", actor=1, target=1, expect={"decision": "Allow"})
    emit("send", actor=1, target=2, expect={"decision": "Deny"})
    emit("send", actor=2, target=3, expect={"decision": "Deny"})

    validate_events(events)
    return events


# ---------------------------------------------------------------------------
# random traces
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceParams:
    vm_count: int = 2
    process_count: int = 4
    name_pool_size: int = 40
    host_fraction: float = 0.3
    global_fraction: float = 0.1
    event_count: int = 200
    seal_position: int = 100

    def check(self):
        if self.vm_count < 1 or self.process_count < 1 or self.name_pool_size < 1:
            raise InvalidParams("vm_count, process_count, name_pool_size must be positive")
        if not 0.0 <= self.host_fraction <= 1.0 or not 0.0 <= self.global_fraction <= 1.0:
            raise InvalidParams("fractions must lie in [0, 1]")
        if self.event_count < 0 or not 0 <= self.seal_position <= self.event_count:
            raise InvalidParams("need 0 <= seal_position <= event_count")


def generate_random_trace(seed: int, params: TraceParams = TraceParams(),
                          constrained: bool = False) -> list[TraceEvent]:
    """Deterministic random workload over a shared name pool.

    ``constrained`` keeps the trace inside the regime where the optimized
    engine provably matches the reference oracle: global-scoped creates
    avoid host names, and after the seal only host names already touched
    before it may be used.
    """
    params.check()
    rng = random.Random(seed)
    host_count = round(params.name_pool_size * params.host_fraction)
    host_names = [rf"\srv\host-{i:04d}" for i in range(host_count)]
    private_names = [rf"\app\obj-{i:04d}" for i in range(params.name_pool_size - host_count)]
    pool = host_names + private_names
    categories = (_PORT, _PIPE, _SECTION, _MUTEX)
    category_of = {name: categories[i % len(categories)] for i, name in enumerate(pool)}
    host_set = set(host_names)
    if constrained and not private_names and params.seal_position == 0:
        raise InvalidParams("constrained mode needs private names or pre-seal events")

    events = []
    seq = 0

    def emit(op, **kwargs):
        nonlocal seq
        seq += 1
        events.append(TraceEvent(seq=seq, op=op, **kwargs))

    emit("load_long_list", names=tuple(host_names))
    for i in range(params.vm_count):
        emit("vm_create", ip=f"10.0.0.{2 + i}")
    emit("spawn", vm=0)   # pid 1: host service process
    vm_pids = []
    for i in range(params.process_count):
        emit("spawn", vm=(i % params.vm_count) + 1)
        vm_pids.append(2 + i)
    for name in host_names:
        emit("create", actor=1, name=name, category=category_of[name])

    touched_host: set[str] = set()
    sealed = False
    for index in range(params.event_count):
        if index == params.seal_position:
            emit("seal")
            sealed = True
        actor = rng.choice(vm_pids)
        is_create = rng.random() < 0.5
        global_create = is_create and rng.random() < params.global_fraction
        if constrained and global_create and not private_names:
            global_create = False

        candidates = pool
        if constrained:
            if global_create:
                candidates = private_names
            elif sealed:
                candidates = sorted(touched_host) + private_names
        name = rng.choice(candidates)

        if not sealed and name in host_set and not (is_create and global_create):
            touched_host.add(name)

        if is_create:
            emit("create", actor=actor, name=name, category=category_of[name],
                 scope="Global" if global_create else "Local")
        else:
            emit("open", actor=actor, name=name, category=category_of[name])
    if params.seal_position == params.event_count:
        emit("seal")

    validate_events(events)
    return events


def first_post_seal_host_touches(events) -> set[str]:
    """Host-list names whose first VM touch happens only after the seal.

    Such a touch (an open, or a non-global create) is exactly where the
    optimized engine diverges from the full-scan oracle: the short list
    never saw the name and the flag forbids the long-list search.
    """
    long_list: set[str] = set()
    vm_of_pid: dict[int, int] = {}
    next_pid = 1
    sealed = False
    touched_pre: set[str] = set()
    diverging: set[str] = set()
    skip: set[str] = set()

    for event in events:
        if event.op == "load_long_list":
            long_list = {n for n in event.names if not n.endswith("*")}
        elif event.op == "spawn":
            vm_of_pid[next_pid] = event.vm
            next_pid += 1
        elif event.op == "seal":
            sealed = True
        elif event.op in ("create", "open") and vm_of_pid.get(event.actor, 0) != 0:
            name = event.name
            if name not in long_list:
                continue
            if not sealed:
                touched_pre.add(name)
            elif name not in touched_pre and name not in diverging and name not in skip:
                if event.op == "open" or event.scope != "Global":
                    diverging.add(name)
                else:
                    # first post-seal touch creates a VM-global copy in both
                    # engines; later touches are not guaranteed to diverge
                    skip.add(name)
    return diverging

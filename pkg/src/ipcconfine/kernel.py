"""Simulated OS surface routing every IPC action through the confinement engine.

State held here: a named-object registry keyed by effective (post-resolution)
names with refcounted handles, per-process message inboxes, a window registry,
and per-VM IP-aliased socket bindings. No real syscalls, networking, or data
transfer; this is the bookkeeping needed to observe the confinement semantics
end to end.
"""

from __future__ import annotations

import itertools
import threading
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .engine import (
    ConfinementEngine,
    DangerousKind,
    ResolveOutcome,
    Verdict,
)
from .errors import (
    AddressInUse,
    AlreadyExists,
    CategoryMismatch,
    InvalidHandle,
    InvalidPort,
    NotFound,
    UnknownProcess,
)
from .model import (
    Intent,
    IpcCategory,
    MESSAGE,
    ProcessRef,
    Scope,
    VmId,
    VmRegistry,
)

__all__ = [
    "ObjectRecord",
    "Handle",
    "WindowRecord",
    "SocketBinding",
    "Delivery",
    "HookScope",
    "HookGrant",
    "SimKernel",
]


@dataclass
class ObjectRecord:
    effective_name: str
    category: IpcCategory
    creator: ProcessRef
    refcount: int = 0


@dataclass
class Handle:
    """An open reference to an object record; usable only by its owner."""

    id: int
    owner: ProcessRef
    object: ObjectRecord
    outcome: ResolveOutcome
    valid: bool = True


@dataclass(frozen=True)
class WindowRecord:
    class_name: str
    owner: ProcessRef


@dataclass(frozen=True)
class SocketBinding:
    owner: ProcessRef
    requested: tuple[str, int]
    effective: tuple[str, int]


class Delivery(Enum):
    DELIVERED = "Delivered"
    BLOCKED = "Blocked"


class HookScope(Enum):
    SYSTEM_WIDE = "SystemWide"
    OWN_VM = "OwnVm"


@dataclass(frozen=True)
class HookGrant:
    """Effective scope of an installed hook: always one context."""

    requested: HookScope
    effective_vm: VmId
    narrowed: bool


class SimKernel:
    """Registry, message bus, window table, and socket table behind the engine.

    Mutations appear atomic (one kernel lock); message delivery is FIFO per
    (sender, receiver) pair.
    """

    def __init__(self, registry: VmRegistry, engine: ConfinementEngine):
        self.registry = registry
        self.engine = engine
        self._lock = threading.RLock()
        self._objects: dict[str, ObjectRecord] = {}
        self._handles: dict[int, Handle] = {}
        self._handle_ids = itertools.count(1)
        self._inboxes: dict[int, deque] = {}
        self._windows: list[WindowRecord] = []
        self._bindings: dict[tuple[str, int], SocketBinding] = {}

    # -- named objects (categories I-IV) --------------------------------------

    def create_object(self, caller: ProcessRef, name: str, category: IpcCategory,
                      scope: Scope = Scope.LOCAL) -> Handle:
        self._check_live(caller)
        outcome = self.engine.resolve(caller, name, category, Intent.CREATE, scope)
        with self._lock:
            record = self._objects.get(outcome.effective_name)
            if record is not None:
                if record.category.group is not category.group:
                    raise CategoryMismatch(
                        f"{outcome.effective_name} exists as {record.category}, not {category}",
                        outcome=outcome)
                raise AlreadyExists(outcome.effective_name, outcome=outcome)
            record = ObjectRecord(outcome.effective_name, category, caller, refcount=1)
            self._objects[outcome.effective_name] = record
            return self._new_handle(caller, record, outcome)

    def open_object(self, caller: ProcessRef, name: str,
                    category: IpcCategory) -> Handle:
        self._check_live(caller)
        outcome = self.engine.resolve(caller, name, category, Intent.OPEN, Scope.LOCAL)
        with self._lock:
            record = self._objects.get(outcome.effective_name)
            if record is None:
                raise NotFound(outcome.effective_name, outcome=outcome)
            if record.category.group is not category.group:
                raise CategoryMismatch(
                    f"{outcome.effective_name} exists as {record.category}, not {category}",
                    outcome=outcome)
            record.refcount += 1
            return self._new_handle(caller, record, outcome)

    def close(self, handle: Handle):
        with self._lock:
            live = self._handles.get(handle.id)
            if live is not handle or not handle.valid:
                raise InvalidHandle(f"handle {handle.id} is not open")
            handle.valid = False
            del self._handles[handle.id]
            record = handle.object
            record.refcount -= 1
            if record.refcount == 0:
                self._objects.pop(record.effective_name, None)

    def _new_handle(self, owner: ProcessRef, record: ObjectRecord,
                    outcome: ResolveOutcome) -> Handle:
        handle = Handle(next(self._handle_ids), owner, record, outcome)
        self._handles[handle.id] = handle
        return handle

    # -- messages (category V) --------------------------------------------------

    def send_message(self, sender: ProcessRef, target: ProcessRef,
                     subtype: str = "WindowsMessage", payload: bytes = b"") -> Delivery:
        self._check_live(sender)
        self._check_live(target)
        verdict = self.engine.access_decide(sender, target, MESSAGE)
        if not verdict.allowed:
            return Delivery.BLOCKED
        with self._lock:
            self._inboxes.setdefault(target.pid, deque()).append(
                (sender.pid, subtype, payload))
        return Delivery.DELIVERED

    def inbox(self, proc: ProcessRef) -> list:
        with self._lock:
            return list(self._inboxes.get(proc.pid, ()))

    # -- windows (substrate for category VII) -------------------------------------

    def register_window(self, owner: ProcessRef, class_name: str) -> WindowRecord:
        self._check_live(owner)
        record = WindowRecord(class_name, owner)
        with self._lock:
            self._windows.append(record)
        return record

    def find_window(self, caller: ProcessRef, class_name: str) -> WindowRecord | None:
        """First matching window visible to the caller; windows in other VMs
        (and in the host, for VM callers) are invisible."""
        with self._lock:
            for record in self._windows:
                if record.class_name == class_name and record.owner.vm == caller.vm:
                    return record
        return None

    def enumerate_windows(self, caller: ProcessRef) -> list[WindowRecord]:
        with self._lock:
            return [w for w in self._windows if w.owner.vm == caller.vm]

    # -- dangerous calls (category VII) -------------------------------------------

    def create_remote_thread(self, caller: ProcessRef, target: ProcessRef) -> Verdict:
        self._check_live(caller)
        self._check_live(target)
        return self.engine.dangerous_decide(caller, target.vm,
                                            DangerousKind.CREATE_REMOTE_THREAD)

    def set_hook(self, caller: ProcessRef, requested_scope: HookScope) -> HookGrant:
        """Hooks never cross a VM border: the effective scope is always the
        caller's own context, even for system-wide requests."""
        self._check_live(caller)
        narrowed = requested_scope is HookScope.SYSTEM_WIDE
        if narrowed:
            self.engine.dangerous_decide(caller, None, DangerousKind.SET_WINDOW_HOOK)
        return HookGrant(requested_scope, caller.vm, narrowed)

    # -- sockets (category VI) -------------------------------------------------------

    def bind_socket(self, caller: ProcessRef, requested_ip: str, port: int) -> SocketBinding:
        self._check_live(caller)
        if not isinstance(port, int) or not 1 <= port <= 65535:
            raise InvalidPort(f"port out of range: {port!r}")
        if caller.vm.is_host:
            effective_ip = requested_ip
        else:
            # IP aliasing: VM sockets always bind the VM's exclusive alias
            effective_ip = self.registry.alias_of(caller.vm)
        key = (effective_ip, port)
        with self._lock:
            if key in self._bindings:
                raise AddressInUse(f"{effective_ip}:{port}")
            binding = SocketBinding(caller, (requested_ip, port), key)
            self._bindings[key] = binding
            return binding

    @property
    def bindings(self) -> list[SocketBinding]:
        with self._lock:
            return sorted(self._bindings.values(),
                          key=lambda b: (b.effective[0], b.effective[1]))

    # -- inspection ---------------------------------------------------------------

    def objects(self) -> dict[str, ObjectRecord]:
        with self._lock:
            return dict(self._objects)

    def live_handle_count(self, record: ObjectRecord) -> int:
        with self._lock:
            return sum(1 for h in self._handles.values()
                       if h.object is record and h.valid)

    def _check_live(self, proc: ProcessRef):
        if not self.registry.process_exists(proc.pid):
            raise UnknownProcess(f"no such pid: {proc.pid}")

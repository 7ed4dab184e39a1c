"""Identity and naming substrate: VMs, processes, object names, IPC categories.

Object names use the Windows object-manager style: backslash-separated
components, always beginning with a backslash (e.g. ``\\RPC Control\\epmapper``).
Each VM gets a disjoint view of that namespace through :func:`rename`, which
prefixes names with a per-VM tag component (``\\vm1\\RPC Control\\epmapper``).
The host context (VM id 0) is never renamed.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from enum import Enum

from .errors import (
    DuplicateAlias,
    HostRenameForbidden,
    InvalidName,
    UnknownProcess,
    UnknownVm,
)

__all__ = [
    "VmId",
    "HOST",
    "ProcessRef",
    "IpcGroup",
    "IpcCategory",
    "Scope",
    "Intent",
    "check_object_name",
    "is_valid_object_name",
    "has_reserved_vm_prefix",
    "vm_tag",
    "rename",
    "unrename",
    "is_global_name",
    "VmRegistry",
]

SEP = "\\"

# First path component that collides with the rename image space.
_RESERVED_COMPONENT = re.compile(r"^vm\d+$")


@dataclass(frozen=True)
class VmId:
    """Identity of an execution context. Id 0 is the host; VMs have id >= 1."""

    id: int

    def __post_init__(self):
        if self.id < 0:
            raise ValueError("VmId must be non-negative")

    @property
    def is_host(self) -> bool:
        return self.id == 0

    def __int__(self) -> int:
        return self.id

    def __str__(self) -> str:
        return "host" if self.id == 0 else f"vm{self.id}"


HOST = VmId(0)


@dataclass(frozen=True)
class ProcessRef:
    """A simulated process: system-wide unique pid pinned to one VM for life."""

    pid: int
    vm: VmId

    def __str__(self) -> str:
        return f"pid{self.pid}@{self.vm}"


class IpcGroup(Enum):
    """The seven mechanism groups IPC operations fall into.

    Groups I-IV address objects by name and are confined by renaming;
    groups V-VII address processes or windows and are confined by
    allow/deny decisions.
    """

    PORT = "I_Port"
    PSEUDO_FILE = "II_PseudoFile"
    SHARED_MEMORY = "III_SharedMemory"
    SYNC = "IV_Sync"
    MESSAGE = "V_Message"
    SOCKET = "VI_Socket"
    DANGEROUS = "VII_Dangerous"

    @property
    def name_addressed(self) -> bool:
        return self in _NAME_ADDRESSED


_NAME_ADDRESSED = {
    IpcGroup.PORT,
    IpcGroup.PSEUDO_FILE,
    IpcGroup.SHARED_MEMORY,
    IpcGroup.SYNC,
}


@dataclass(frozen=True)
class IpcCategory:
    """Group plus a free-form subtype label (e.g. IV_Sync:Mutex)."""

    group: IpcGroup
    subtype: str = ""

    @property
    def name_addressed(self) -> bool:
        return self.group.name_addressed

    def __str__(self) -> str:
        return f"{self.group.value}:{self.subtype}" if self.subtype else self.group.value

    @classmethod
    def parse(cls, text: str) -> "IpcCategory":
        group_text, _, subtype = text.partition(":")
        try:
            group = IpcGroup(group_text)
        except ValueError:
            raise ValueError(f"unknown IPC group {group_text!r}") from None
        return cls(group, subtype)


# Convenience instances for the common category spellings.
PORT = IpcCategory(IpcGroup.PORT)
PSEUDO_FILE = IpcCategory(IpcGroup.PSEUDO_FILE)
SHARED_MEMORY = IpcCategory(IpcGroup.SHARED_MEMORY)
SYNC = IpcCategory(IpcGroup.SYNC)
MESSAGE = IpcCategory(IpcGroup.MESSAGE)
SOCKET = IpcCategory(IpcGroup.SOCKET)
DANGEROUS = IpcCategory(IpcGroup.DANGEROUS)


class Scope(Enum):
    """Visibility declared at object creation; only groups I-IV carry one."""

    LOCAL = "Local"
    GLOBAL = "Global"


class Intent(Enum):
    CREATE = "Create"
    OPEN = "Open"


def check_object_name(name: str, allow_pattern: bool = False) -> str:
    """Validate object-name syntax and return the name unchanged.

    A valid name starts with the separator, has no empty components and no
    trailing separator. ``allow_pattern`` additionally permits a single
    trailing ``*`` (host-list entries matching an arbitrary decimal suffix);
    plain object names never contain ``*``.
    """
    if not isinstance(name, str) or not name.startswith(SEP):
        raise InvalidName(f"object name must start with {SEP!r}: {name!r}")
    body = name[1:]
    if not body:
        raise InvalidName(f"object name has no components: {name!r}")
    components = body.split(SEP)
    if any(c == "" for c in components):
        raise InvalidName(f"empty component or trailing separator: {name!r}")
    star = name.count("*")
    if star:
        if not allow_pattern or star > 1 or not name.endswith("*") or name.endswith(SEP + "*"):
            raise InvalidName(f"'*' only allowed as a trailing suffix pattern: {name!r}")
    return name


def is_valid_object_name(name: str, allow_pattern: bool = False) -> bool:
    try:
        check_object_name(name, allow_pattern=allow_pattern)
    except InvalidName:
        return False
    return True


def has_reserved_vm_prefix(name: str) -> bool:
    """True if the first component looks like a rename tag (``vm<digits>``)."""
    first = name[1:].split(SEP, 1)[0] if name.startswith(SEP) else ""
    return bool(_RESERVED_COMPONENT.match(first))


def vm_tag(vm: VmId) -> str:
    return f"vm{vm.id}"


def rename(name: str, vm: VmId) -> str:
    """Prefix ``name`` with the VM's tag component.

    Deterministic and injective per VM; images for distinct VMs are disjoint,
    and disjoint from original names as long as originals never start with a
    ``vm<digits>`` component (enforced by the trace validator, not here).
    Host names are never renamed.
    """
    if vm.is_host:
        raise HostRenameForbidden("host (vm 0) names are never renamed")
    check_object_name(name)
    return SEP + vm_tag(vm) + name


def unrename(effective: str) -> tuple[VmId, str] | None:
    """Invert :func:`rename`: (vm, original) if ``effective`` carries a VM tag."""
    if not effective.startswith(SEP):
        return None
    first, sep, rest = effective[1:].partition(SEP)
    if sep and _RESERVED_COMPONENT.match(first):
        return VmId(int(first[2:])), SEP + rest
    return None


def is_global_name(name: str, declared_scope: Scope) -> bool:
    """Global if declared so, or if any path component is literally "Global"."""
    if declared_scope is Scope.GLOBAL:
        return True
    return "Global" in name[1:].split(SEP)


class VmRegistry:
    """Allocates VM ids and pids; tracks alias IPs and live processes.

    Ids are never reused within one run. Allocation is linearizable: a lock
    makes each create/spawn atomic, so concurrent callers observe a total
    order with unique, monotonically increasing ids.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._aliases: dict[VmId, str] = {}
        self._by_alias: dict[str, VmId] = {}
        self._next_vm = 1
        self._next_pid = 1
        self._processes: dict[int, ProcessRef] = {}

    def vm_create(self, alias_ip: str) -> VmId:
        if not alias_ip or not isinstance(alias_ip, str):
            raise DuplicateAlias("alias IP must be a non-empty string")
        with self._lock:
            if alias_ip in self._by_alias:
                raise DuplicateAlias(f"alias {alias_ip} already assigned to {self._by_alias[alias_ip]}")
            vm = VmId(self._next_vm)
            self._next_vm += 1
            self._aliases[vm] = alias_ip
            self._by_alias[alias_ip] = vm
            return vm

    def process_spawn(self, vm: VmId) -> ProcessRef:
        with self._lock:
            if not vm.is_host and vm not in self._aliases:
                raise UnknownVm(f"no such VM: {vm}")
            proc = ProcessRef(self._next_pid, vm)
            self._next_pid += 1
            self._processes[proc.pid] = proc
            return proc

    def vm_exists(self, vm: VmId) -> bool:
        return vm.is_host or vm in self._aliases

    def alias_of(self, vm: VmId) -> str:
        if vm not in self._aliases:
            raise UnknownVm(f"no such VM: {vm}")
        return self._aliases[vm]

    def process(self, pid: int) -> ProcessRef:
        try:
            return self._processes[pid]
        except KeyError:
            raise UnknownProcess(f"no such pid: {pid}") from None

    def process_exists(self, pid: int) -> bool:
        return pid in self._processes

    @property
    def vms(self) -> list[VmId]:
        return sorted(self._aliases, key=lambda v: v.id)

    @property
    def processes(self) -> list[ProcessRef]:
        return [self._processes[pid] for pid in sorted(self._processes)]

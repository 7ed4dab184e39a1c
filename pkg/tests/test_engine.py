"""Resolve pipeline, host-object table mechanics, and VM-id access decisions."""

import pytest

from ipcconfine.engine import (
    ConfinementEngine,
    DangerousKind,
    Decision,
    Principle,
    ResolveOutcome,
    Route,
    SYSTEM_WIDE,
)
from ipcconfine.errors import (
    AlreadyLoaded,
    BadCategory,
    InvalidName,
    NotLoaded,
)
from ipcconfine.model import (
    HOST,
    Intent,
    MESSAGE,
    PORT,
    ProcessRef,
    Scope,
    SHARED_MEMORY,
    VmId,
)

VM1 = ProcessRef(10, VmId(1))
VM2 = ProcessRef(11, VmId(2))
HOSTP = ProcessRef(1, HOST)


def resolve(engine, proc, name, intent=Intent.OPEN, scope=Scope.LOCAL, category=PORT):
    return engine.resolve(proc, name, category, intent, scope)


class TestLifecycle:
    def test_resolve_requires_loaded_list(self):
        engine = ConfinementEngine()
        with pytest.raises(NotLoaded):
            resolve(engine, VM1, r"\a\b")
        with pytest.raises(NotLoaded):
            engine.seal_host_objects()

    def test_load_once(self, engine):
        with pytest.raises(AlreadyLoaded):
            engine.load_long_list([r"\x\y"])

    def test_load_counts_and_dedups(self):
        engine = ConfinementEngine()
        assert engine.load_long_list([r"\a\b", r"\a\b", r"\p\q*", r"\p\q*"]) == 2

    def test_load_validates_names(self):
        engine = ConfinementEngine()
        with pytest.raises(InvalidName):
            engine.load_long_list(["not-a-name"])

    def test_resolve_rejects_bad_input(self, engine):
        with pytest.raises(BadCategory):
            resolve(engine, VM1, r"\a\b", category=MESSAGE)
        with pytest.raises(InvalidName):
            resolve(engine, VM1, "no-lead-sep")


class TestPipeline:
    def test_host_caller_bypasses_everything(self, engine):
        # even a long-listed name: passthrough with no short-list update
        out = resolve(engine, HOSTP, r"\srv\alpha")
        assert out == ResolveOutcome(r"\srv\alpha", Route.HOST_PASSTHROUGH, Principle.HOST_OBJECT)
        assert engine.snapshot().short_list == ()
        assert engine.counters.host_bypass == 1
        assert engine.counters.host_passthroughs == 0

    def test_create_global_registers_and_renames(self, engine):
        out = resolve(engine, VM1, r"\obj\shared", Intent.CREATE, Scope.GLOBAL,
                      SHARED_MEMORY)
        assert out == ResolveOutcome(r"\vm1\obj\shared", Route.VM_GLOBAL,
                                     Principle.GLOBAL_OBJECT)
        assert engine.snapshot().global_tables == {1: frozenset({r"\obj\shared"})}

    def test_literal_global_component_counts(self, engine):
        out = resolve(engine, VM1, r"\BaseNamedObjects\Global\X", Intent.CREATE,
                      Scope.LOCAL, SHARED_MEMORY)
        assert out.route is Route.VM_GLOBAL

    def test_global_table_hit_on_open(self, engine):
        resolve(engine, VM1, r"\obj\shared", Intent.CREATE, Scope.GLOBAL)
        out = resolve(engine, VM1, r"\obj\shared")
        assert out.effective_name == r"\vm1\obj\shared"
        assert out.route is Route.VM_GLOBAL
        assert engine.counters.global_table_hits == 2

    def test_global_tables_are_per_vm(self, engine):
        resolve(engine, VM1, r"\obj\shared", Intent.CREATE, Scope.GLOBAL)
        out = resolve(engine, VM2, r"\obj\shared")
        # vm2 never created it globally: plain rename, not a table hit
        assert out == ResolveOutcome(r"\vm2\obj\shared", Route.VM_PRIVATE,
                                     Principle.ISOLATION)

    def test_open_global_name_without_create_is_not_registered(self, engine):
        out = resolve(engine, VM1, r"\x\Global\y", Intent.OPEN)
        assert out.route is Route.VM_PRIVATE
        assert engine.snapshot().global_tables.get(1, frozenset()) == frozenset()

    def test_first_host_touch_long_hit(self, engine):
        out = resolve(engine, VM1, r"\srv\alpha")
        assert out == ResolveOutcome(r"\srv\alpha", Route.HOST_PASSTHROUGH,
                                     Principle.HOST_OBJECT)
        assert engine.counters.long_hits == 1
        assert engine.snapshot().short_list == (r"\srv\alpha",)

    def test_second_host_touch_short_hit(self, engine):
        resolve(engine, VM1, r"\srv\alpha")
        reads = engine.counters.long_list_reads
        out = resolve(engine, VM2, r"\srv\alpha")
        assert out.route is Route.HOST_PASSTHROUGH
        assert engine.counters.short_hits == 1
        # short hits never consult the long list
        assert engine.counters.long_list_reads == reads

    def test_miss_renames(self, engine):
        out = resolve(engine, VM1, r"\app\private")
        assert out == ResolveOutcome(r"\vm1\app\private", Route.VM_PRIVATE,
                                     Principle.ISOLATION)
        assert engine.counters.long_misses == 1
        assert engine.snapshot().short_list == ()

    def test_mru_order(self, engine):
        for name in (r"\srv\alpha", r"\srv\beta", r"\srv\gamma"):
            resolve(engine, VM1, name)
        assert engine.snapshot().short_list == (r"\srv\gamma", r"\srv\beta", r"\srv\alpha")
        resolve(engine, VM1, r"\srv\alpha")
        assert engine.snapshot().short_list == (r"\srv\alpha", r"\srv\gamma", r"\srv\beta")


class TestWildcard:
    @pytest.mark.parametrize("name,hits", [
        (r"\Device\NamedPipe\ctl\Pipe1", True),
        (r"\Device\NamedPipe\ctl\Pipe42", True),
        (r"\Device\NamedPipe\ctl\Pipe", False),
        (r"\Device\NamedPipe\ctl\PipeX", False),
        (r"\Device\NamedPipe\ctl\Pip1", False),
    ])
    def test_pattern_matches_decimal_suffix(self, engine, name, hits):
        out = resolve(engine, VM1, name)
        expected = Route.HOST_PASSTHROUGH if hits else Route.VM_PRIVATE
        assert out.route is expected

    def test_matched_concrete_name_enters_short_list(self, engine):
        resolve(engine, VM1, r"\Device\NamedPipe\ctl\Pipe7")
        snap = engine.snapshot()
        assert snap.short_list == (r"\Device\NamedPipe\ctl\Pipe7",)
        assert snap.long_patterns == (r"\Device\NamedPipe\ctl\Pipe*",)
        # a sibling instance is its own long-list consultation
        resolve(engine, VM1, r"\Device\NamedPipe\ctl\Pipe8")
        assert engine.counters.long_hits == 2


class TestSeal:
    def test_seal_sets_one_way_flag(self, engine):
        assert not engine.sealed
        engine.seal_host_objects()
        assert engine.sealed
        engine.seal_host_objects()   # idempotent
        assert engine.sealed

    def test_post_seal_skips_long_list(self, engine):
        resolve(engine, VM1, r"\srv\alpha")
        engine.seal_host_objects()
        reads = engine.counters.long_list_reads
        out = resolve(engine, VM1, r"\srv\beta")   # long-listed but never touched
        assert out == ResolveOutcome(r"\vm1\srv\beta", Route.VM_PRIVATE,
                                     Principle.ISOLATION)
        assert engine.counters.post_seal_long_skips == 1
        assert engine.counters.long_list_reads == reads

    def test_post_seal_short_list_still_serves(self, engine):
        resolve(engine, VM1, r"\srv\alpha")
        engine.seal_host_objects()
        out = resolve(engine, VM2, r"\srv\alpha")
        assert out.route is Route.HOST_PASSTHROUGH
        assert engine.counters.short_hits == 1

    def test_post_seal_short_list_frozen(self, engine):
        resolve(engine, VM1, r"\srv\alpha")
        resolve(engine, VM1, r"\srv\beta")
        engine.seal_host_objects()
        before = engine.snapshot().short_list
        assert before == (r"\srv\beta", r"\srv\alpha")
        # hits no longer move entries; misses no longer insert
        resolve(engine, VM1, r"\srv\alpha")
        resolve(engine, VM1, r"\srv\gamma")
        assert engine.snapshot().short_list == before

    def test_post_seal_globals_still_work(self, engine):
        engine.seal_host_objects()
        out = resolve(engine, VM1, r"\obj\g", Intent.CREATE, Scope.GLOBAL)
        assert out.route is Route.VM_GLOBAL
        assert resolve(engine, VM1, r"\obj\g").route is Route.VM_GLOBAL


class TestCounters:
    def test_conservation_over_mixed_sequence(self, engine):
        resolve(engine, HOSTP, r"\srv\alpha")
        resolve(engine, VM1, r"\obj\g", Intent.CREATE, Scope.GLOBAL)
        resolve(engine, VM1, r"\obj\g")
        resolve(engine, VM1, r"\srv\alpha")
        resolve(engine, VM2, r"\srv\alpha")
        resolve(engine, VM2, r"\nowhere\x")
        engine.seal_host_objects()
        resolve(engine, VM2, r"\srv\beta")
        resolve(engine, VM1, r"\srv\alpha")
        c = engine.counters
        assert c.conservation_holds()
        assert c.to_dict() == {
            "resolves_total": 8,
            "global_table_hits": 2,
            "short_hits": 2,
            "long_hits": 1,
            "long_misses": 1,
            "renames": 4,
            "host_passthroughs": 3,
            "post_seal_long_skips": 1,
            "denials": 0,
            "host_bypass": 1,
            "long_list_reads": 2,
        }

    def test_copy_is_detached(self, engine):
        snap = engine.counters.copy()
        resolve(engine, VM1, r"\a\b")
        assert snap.resolves_total == 0
        assert engine.counters.resolves_total == 1


class TestSnapshot:
    def test_snapshot_is_immutable_view(self, engine):
        resolve(engine, VM1, r"\srv\alpha")
        resolve(engine, VM1, r"\obj\g", Intent.CREATE, Scope.GLOBAL)
        snap = engine.snapshot()
        resolve(engine, VM1, r"\srv\beta")
        resolve(engine, VM2, r"\obj\h", Intent.CREATE, Scope.GLOBAL)
        assert snap.short_list == (r"\srv\alpha",)
        assert snap.global_tables == {1: frozenset({r"\obj\g"})}
        assert snap.counters.resolves_total == 2

    def test_snapshot_serializes(self, engine):
        resolve(engine, VM1, r"\srv\alpha")
        d = engine.snapshot().to_dict()
        assert d["short_list"] == [r"\srv\alpha"]
        assert d["flag"] is False
        assert r"\srv\alpha" in d["long_list"]


class TestAccessDecisions:
    def test_send_same_vm_allowed(self, engine):
        verdict = engine.access_decide(VM1, ProcessRef(99, VmId(1)), MESSAGE)
        assert verdict.allowed and verdict.reason == "SameVm"

    def test_send_cross_vm_denied(self, engine):
        verdict = engine.access_decide(VM1, VM2, MESSAGE)
        assert verdict.decision is Decision.DENY
        assert verdict.reason == "CrossVm"
        assert engine.counters.denials == 1

    def test_send_host_vm_border_denied_both_ways(self, engine):
        assert not engine.access_decide(VM1, HOSTP, MESSAGE).allowed
        assert not engine.access_decide(HOSTP, VM1, MESSAGE).allowed
        assert engine.access_decide(HOSTP, ProcessRef(2, HOST), MESSAGE).allowed

    def test_access_decide_rejects_named_categories(self, engine):
        with pytest.raises(BadCategory):
            engine.access_decide(VM1, VM2, PORT)

    def test_dangerous_same_vm_allowed(self, engine):
        verdict = engine.dangerous_decide(VM1, VmId(1), DangerousKind.CREATE_REMOTE_THREAD)
        assert verdict.allowed

    @pytest.mark.parametrize("kind", list(DangerousKind))
    def test_dangerous_cross_vm_denied(self, engine, kind):
        assert not engine.dangerous_decide(VM1, VmId(2), kind).allowed
        assert not engine.dangerous_decide(VM1, HOST, kind).allowed
        assert not engine.dangerous_decide(HOSTP, VmId(1), kind).allowed

    def test_system_wide_hook_narrowed_not_denied(self, engine):
        verdict = engine.dangerous_decide(VM1, SYSTEM_WIDE, DangerousKind.SET_WINDOW_HOOK)
        assert verdict.allowed and verdict.reason == "ScopedToVm"
        assert engine.counters.denials == 0

"""Differential check: Wasm interpretation versus evaluation of the abstraction."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ..ssr.abstraction import ModuleAbstraction
from ..ssr.names import NameGenerator
from ..wasm import WasmModule
from . import numeric as N
from .evaluator import FragmentEvaluator
from .interp import DEFAULT_FUEL, HostTrace, Instance, OutOfFuel, initial_memory
from .numeric import Trap

log = logging.getLogger(__name__)


@dataclass
class Outcome:
    result: object = None           # single value or None
    trace: HostTrace = field(default_factory=HostTrace)
    trap: str | None = None
    timeout: bool = False


@dataclass
class Mismatch:
    args: list
    wasm: Outcome
    fragment: Outcome
    reason: str


@dataclass
class DifferentialReport:
    func_index: int
    checked: int = 0
    skipped: int = 0                # inputs where either side ran out of fuel
    mismatches: list = field(default_factory=list)
    error: str | None = None        # abstraction failure

    @property
    def ok(self) -> bool:
        return self.error is None and not self.mismatches


def run_wasm(module: WasmModule, func_index: int, args: list, host=None, bindings=None,
             fuel: int = DEFAULT_FUEL) -> Outcome:
    inst = Instance(module, host, bindings, fuel)
    out = Outcome(trace=inst.trace)
    try:
        results = inst.invoke(func_index, list(args))
        out.result = results[0] if results else None
    except Trap as trap:
        out.trap = trap.kind
    except OutOfFuel:
        out.timeout = True
    return out


def run_fragment(abstraction: ModuleAbstraction, func_index: int, args: list, host=None,
                 fuel: int = DEFAULT_FUEL) -> Outcome:
    module = abstraction.module
    fragment = abstraction.function(func_index)
    state, _ = abstraction.state_statements([func_index])
    ev = FragmentEvaluator(initial_memory(module), host,
                           module.memories[0].max if module.memories else None, fuel)
    out = Outcome(trace=ev.trace)
    try:
        ev.load_state(state)
        params = module.func_type(func_index).params
        out.result = ev.run_fragment(fragment, [N.canonical(t, a) for t, a in zip(params, args)])
    except Trap as trap:
        out.trap = trap.kind
    except OutOfFuel:
        out.timeout = True
    return out


def compare(vtype: str | None, wasm: Outcome, frag: Outcome) -> str | None:
    """Reason the two outcomes differ, or None when they agree."""
    if wasm.trap != frag.trap:
        return f"trap {wasm.trap!r} != {frag.trap!r}"
    if wasm.trace.calls != frag.trace.calls:
        return "host-call trace differs"
    if wasm.trap is None and vtype is not None and not N.values_equal(vtype, wasm.result, frag.result):
        return f"result {wasm.result!r} != {frag.result!r}"
    return None


def differential_check(module: WasmModule, func_index: int, inputs, host=None, bindings=None,
                       fuel: int = DEFAULT_FUEL) -> DifferentialReport:
    """Compare (result, trace, trap) of both sides for every input vector."""
    report = DifferentialReport(func_index)
    abstraction = ModuleAbstraction(module, bindings, NameGenerator())
    fragment = abstraction.function(func_index)
    if fragment.failed:
        report.error = fragment.error
        return report
    ftype = module.func_type(func_index)
    vtype = ftype.results[0] if ftype.results else None
    for args in inputs:
        wasm = run_wasm(module, func_index, args, host, bindings, fuel)
        frag = run_fragment(abstraction, func_index, args, host, fuel)
        if wasm.timeout or frag.timeout:
            if wasm.timeout != frag.timeout:
                report.mismatches.append(Mismatch(list(args), wasm, frag, "only one side terminated"))
            else:
                report.skipped += 1
            continue
        report.checked += 1
        reason = compare(vtype, wasm, frag)
        if reason:
            report.mismatches.append(Mismatch(list(args), wasm, frag, reason))
    return report

"""Seeded random generator for subject programs, suites, and upgrades.

Programs are always valid (binding discipline, resolvable calls, a main
entry) and terminating: loops are counter-bounded, and the call structure
is acyclic.  Everything is a pure function of the provided RNG, so tests
replay exactly from a seed.
"""

from __future__ import annotations

import random

from regmine.minilang import Scenario, TestCase, execute, parse_program
from regmine.minilang.interp import OutcomeKind
from regmine.tracefile import MonitorPlan

EMPTY_PLAN = MonitorPlan(0, frozenset(), frozenset())

_BINOPS = ["+", "-", "*", "+", "-", "<", "<=", "==", "!=", ">=", ">", "/", "%", "and", "or"]


class _FnSpec:
    def __init__(self, name: str, params: list[str]):
        self.name = name
        self.params = params
        self.body: list[str] = []

    def render(self) -> str:
        lines = [f"fn {self.name}({', '.join(self.params)}) {{"]
        lines.extend("  " + b for b in self.body)
        lines.append("}")
        return "\n".join(lines)


class _BodyGen:
    def __init__(self, rng: random.Random, params: list[str], callees: list[tuple[str, int]]):
        self.rng = rng
        self.callees = callees
        self.fresh = 0
        self.params = params

    def name(self) -> str:
        self.fresh += 1
        return f"v{self.fresh}"

    def expr(self, variables: list[str], depth: int, calls: bool = True) -> str:
        rng = self.rng
        if depth <= 0 or rng.random() < 0.35:
            if variables and rng.random() < 0.65:
                return rng.choice(variables)
            return str(rng.randint(-3, 5))
        if calls and self.callees and rng.random() < 0.2:
            fname, arity = rng.choice(self.callees)
            args = ", ".join(self.expr(variables, depth - 1, calls=False) for _ in range(arity))
            return f"{fname}({args})"
        op = rng.choice(_BINOPS)
        left = self.expr(variables, depth - 1, calls)
        right = self.expr(variables, depth - 1, calls)
        return f"({left} {op} {right})"

    def stmts(self, variables: list[str], depth: int, budget: int) -> list[str]:
        rng = self.rng
        out: list[str] = []
        for _ in range(rng.randint(1, budget)):
            r = rng.random()
            if r < 0.45:
                v = self.name()
                out.append(f"let {v} = {self.expr(variables, 2)};")
                variables.append(v)
            elif r < 0.6 and variables:
                v = rng.choice(variables)
                out.append(f"{v} = {self.expr(variables, 2)};")
            elif r < 0.8 and depth > 0:
                cond = self.expr(variables, 1)
                then = self.stmts(list(variables), depth - 1, 2)
                if rng.random() < 0.5:
                    orelse = self.stmts(list(variables), depth - 1, 2)
                    out.append(f"if {cond} {{ {' '.join(then)} }} else {{ {' '.join(orelse)} }}")
                else:
                    out.append(f"if {cond} {{ {' '.join(then)} }}")
            elif r < 0.9 and depth > 0:
                w = self.name()
                bound = rng.randint(1, 3)
                body = self.stmts(list(variables), 0, 2)
                out.append(f"let {w} = 0;")
                out.append(
                    f"while {w} < {bound} {{ {' '.join(body)} {w} = {w} + 1; }}"
                )
            else:
                out.append(f"{self.expr(variables, 2)};")
        return out


def gen_function(rng: random.Random, name: str, params: list[str], callees: list[tuple[str, int]]) -> _FnSpec:
    spec = _FnSpec(name, params)
    gen = _BodyGen(rng, params, callees)
    variables = list(params)
    spec.body = gen.stmts(variables, 2, 3)
    if rng.random() < 0.9:
        spec.body.append(f"return {gen.expr(variables, 2)};")
    return spec


def gen_functions(rng: random.Random) -> list[_FnSpec]:
    n_helpers = rng.randint(0, 2)
    helper_sigs = []
    for i in range(n_helpers):
        arity = rng.randint(1, 2)
        helper_sigs.append((f"h{i}", [f"p{j}" for j in range(arity)]))
    specs: list[_FnSpec] = []
    # helpers may call only strictly later helpers: the call DAG is acyclic
    for i, (name, params) in enumerate(helper_sigs):
        callees = [(n, len(p)) for n, p in helper_sigs[i + 1 :]]
        specs.append(gen_function(rng, name, params, callees))
    main_params = [f"a{j}" for j in range(rng.randint(1, 2))]
    callees = [(n, len(p)) for n, p in helper_sigs]
    specs.insert(0, gen_function(rng, "main", main_params, callees))
    return specs


def render_program(specs: list[_FnSpec]) -> str:
    return "\n\n".join(s.render() for s in specs) + "\n"


def gen_program(rng: random.Random) -> str:
    return render_program(gen_functions(rng))


def mutate_program(rng: random.Random, specs: list[_FnSpec]) -> list[_FnSpec]:
    """Upgrade: regenerate one function body (same signature), and sometimes
    add a new helper no one calls yet."""
    specs = [s for s in specs]
    idx = rng.randrange(len(specs))
    victim = specs[idx]
    sigs = [(s.name, len(s.params)) for s in specs if s.name not in ("main", victim.name)]
    callees = sigs if victim.name == "main" else []
    specs[idx] = gen_function(rng, victim.name, victim.params, callees)
    if rng.random() < 0.25:
        specs.append(gen_function(rng, f"g{rng.randint(0, 9)}", ["q0"], []))
    return specs


def gen_domains(rng: random.Random, params: tuple[str, ...]) -> dict[str, tuple[int, int]]:
    domains = {}
    for p in params:
        lo = rng.randint(-4, 0)
        domains[p] = (lo, lo + rng.randint(1, 5))
    return domains


def gen_scenario(
    rng: random.Random,
    program,
    oracle_program=None,
    n_tests: tuple[int, int] = (3, 6),
    budget: int = 100_000,
) -> Scenario:
    """Suite over small domains; expectations are computed by executing
    ``oracle_program`` (the program itself by default), so suites pass on
    the oracle and fail wherever another version's behavior diverges."""
    oracle = oracle_program if oracle_program is not None else program
    params = program.entry_function().params
    domains = gen_domains(rng, params)
    tests = []
    for i in range(rng.randint(*n_tests)):
        args = tuple(rng.randint(*domains[p]) for p in params)
        outcome, _ = execute(oracle, list(args), budget, EMPTY_PLAN)
        if outcome.kind is OutcomeKind.RETURNED:
            expect: int | None = outcome.value
        elif outcome.kind is OutcomeKind.RUNTIME_ERROR:
            expect = None
        else:  # pragma: no cover - generated loops are bounded
            raise AssertionError("generated program exhausted its budget")
        tests.append(TestCase(f"t{i + 1}", args, expect))
    return Scenario(domains, tuple(tests))


def gen_program_and_scenario(seed: int):
    rng = random.Random(seed)
    source = gen_program(rng)
    program = parse_program(source)
    scenario = gen_scenario(rng, program)
    return program, scenario


def gen_version_pair(seed: int):
    """(base, upgraded) programs plus a scenario per version."""
    rng = random.Random(seed)
    base_specs = gen_functions(rng)
    upgraded_specs = mutate_program(rng, base_specs)
    base = parse_program(render_program(base_specs))
    upgraded = parse_program(render_program(upgraded_specs))
    base_scenario = gen_scenario(rng, base)
    # expectations for the upgraded suite mostly match the upgraded program,
    # sometimes the base one, so failing tests occur
    oracle = base if rng.random() < 0.5 else upgraded
    upgraded_scenario = gen_scenario(rng, upgraded, oracle_program=oracle)
    return base, upgraded, base_scenario, upgraded_scenario


def monitor_all(program) -> MonitorPlan:
    return MonitorPlan(0, frozenset(), frozenset(program.functions))

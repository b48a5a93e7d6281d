"""End-to-end verification runs.

A `Driver` takes source files through the whole pipeline: parse,
typecheck, annotate, translate the pool once, build one VC per target
routine, and discharge the VCs against the configured solver. Outcomes
are delivered to subscribers as they become available and returned as a
list in delivery order.

Two delivery modes share all of that machinery. Bulk mode discharges
every VC first and then delivers the whole batch in program order;
forked mode delivers each outcome the moment its solver run completes.
Solving may use several solver processes in either mode; translation is
always single-threaded in the calling thread, so both modes verify the
same IVL program and differ only in scheduling and delivery order.

When a run fails before solving starts, the failure is still reported
through outcomes: unreadable or ill-typed units become `invalid`
outcomes carrying their diagnostics, and a missing solver marks every
remaining target with an `error` outcome instead of raising.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import FIRST_COMPLETED, Future, ThreadPoolExecutor, wait
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

from miniproof.diagnostics import (
    ConfigurationError,
    Diagnostic,
    InputError,
    Position,
    error,
)
from miniproof.frontend import parse_unit, resolve_annotations, typecheck
from miniproof.frontend import ast
from miniproof.frontend.typecheck import TypedProgram
from miniproof.ivl import (
    CheckAttribution,
    IvlProcedure,
    Vc,
    check_wellformed,
    cut_loops,
    passify,
    unroll_loops,
    wp,
)
from miniproof.ivl.ast import SIf, SLoop, Stmt
from miniproof.smt import SolverConfig, discharge_vc, discover_solver
from miniproof.translate import TranslationOptions, translate_pool

log = logging.getLogger(__name__)

STATUSES = ("verified", "failed", "invalid", "skipped", "timeout", "error")


@dataclass(frozen=True)
class StepTwoEvidence:
    """What happened when the failing routine was retried with loops
    unrolled: the depth used and the verdict of that second attempt."""

    depth: int
    status: str  # "verified" | "failed" | "timeout" | "error"


@dataclass(frozen=True)
class FailedCheck:
    label: str
    attribution: CheckAttribution
    message: str
    # "failed" when the solver produced a countermodel, "unknown" when it
    # gave up without one; both leave the routine unverified.
    solver_status: str


@dataclass(frozen=True)
class VerificationOutcome:
    class_name: str
    routine: str
    status: str
    checks: tuple[FailedCheck, ...] = ()
    suggestions: tuple[str, ...] = ()
    step_two: Optional[StepTwoEvidence] = None
    diagnostics: tuple[Diagnostic, ...] = ()
    translation_time: float = 0.0
    solving_time: float = 0.0
    # free-form context for error/skipped statuses (text report only)
    detail: str = ""

    @property
    def qualified(self) -> str:
        if not self.routine:
            return self.class_name
        return f"{self.class_name}.{self.routine}"


@dataclass(frozen=True)
class RunOptions:
    mode: str = "bulk"  # "bulk" | "forked"
    two_step: bool = True
    unroll_depth: int = 3
    timeout: float = 30.0
    seed: int = 0
    jobs: int = 1
    solver: Optional[str] = None
    theory_path: tuple[str, ...] = ()
    filters: tuple[str, ...] = ()
    invariant_defaults: bool = True


_STRENGTHEN = (
    "no obvious errors in the loop; "
    "strengthen the loop invariant to make it inductive"
)


def suggest(
    failure: CheckAttribution, step_two: Optional[StepTwoEvidence] = None
) -> str:
    """Deterministic advice for one failed check.

    With step-two evidence the message reflects the unrolled retry;
    without it, the check kind alone picks the message.
    """
    if step_two is not None:
        if step_two.status == "verified":
            return _STRENGTHEN
        if step_two.status == "failed":
            return (
                f"still failing with loops unrolled {step_two.depth} times; "
                "a real error is likely"
            )
        return ""

    kind = failure.kind
    clause = f" '{failure.tag}'" if failure.tag else ""
    if kind == "precondition-at-call":
        callee = failure.callee or "the callee"
        return (
            f"the callee's precondition{clause} may not hold "
            f"at this call to '{callee}'"
        )
    if kind == "postcondition":
        return f"the body may not establish postcondition{clause} on every path"
    if kind == "loop-invariant-entry":
        return f"loop invariant{clause} may not hold when the loop is first entered"
    if kind == "loop-invariant-maintained":
        return f"an arbitrary iteration may not preserve loop invariant{clause}"
    if kind == "variant-nonnegative":
        if failure.callee:
            return (
                f"the measure of the recursive call to '{failure.callee}' "
                "may be negative"
            )
        return "the variant may be negative before the loop exits"
    if kind == "variant-decreases":
        if failure.generated:
            return (
                "the loop declares no variant; to prove termination "
                "a suitable variant be provided"
            )
        if failure.callee:
            return (
                f"the measure may not decrease at the recursive call "
                f"to '{failure.callee}'"
            )
        return "the variant may not strictly decrease across an iteration"
    if kind == "overflow":
        return "this arithmetic may leave the machine integer range"
    if kind == "void-target":
        return "possible Void dereference: the target may not be attached"
    if kind == "class-invariant":
        return f"the class invariant{clause} may not be restored on exit"
    if kind == "frame":
        return "this assignment may modify a location outside the modify clause"
    if kind == "check-assertion":
        return f"check assertion{clause} may not hold here"
    return f"check{clause} of kind {kind} may fail"


def _has_loops(stmts: list[Stmt]) -> bool:
    for s in stmts:
        if isinstance(s, SLoop):
            return True
        if isinstance(s, SIf) and (_has_loops(s.then) or _has_loops(s.els)):
            return True
    return False


@dataclass
class _Target:
    """One routine scheduled for solving."""

    name: str  # qualified CLASS.routine
    proc: IvlProcedure  # translated, loops still structured
    vc: Vc
    translation_time: float
    has_loops: bool


class Driver:
    """One verification run at a time; independent instances are unrelated.

    Subscribers registered before `verify` receive every outcome exactly
    once, serially, in delivery order. A consumer that raises is logged
    and dropped from nothing: later outcomes are still delivered to it.
    """

    def __init__(self, options: Optional[RunOptions] = None):
        self.options = options or RunOptions()
        self._consumers: list[Callable[[VerificationOutcome], None]] = []
        self._running = False

    def subscribe(self, consumer: Callable[[VerificationOutcome], None]) -> int:
        self._consumers.append(consumer)
        return len(self._consumers) - 1

    # -- delivery ----------------------------------------------------------------

    def _deliver(
        self, outcome: VerificationOutcome, delivered: list[VerificationOutcome]
    ) -> None:
        delivered.append(outcome)
        for consumer in self._consumers:
            try:
                consumer(outcome)
            except Exception:
                log.exception("outcome consumer failed; continuing delivery")

    # -- the run -----------------------------------------------------------------

    def verify(
        self,
        paths: Sequence[str | Path] = (),
        sources: Sequence[tuple[str, str]] = (),
    ) -> list[VerificationOutcome]:
        """Verify every selected routine in the given files.

        `sources` entries are (name, text) pairs treated like files that
        were already read. Returns outcomes in delivery order.
        """
        if self._running:
            raise ConfigurationError("this driver is already running a verification")
        self._running = True
        try:
            return self._verify(paths, sources)
        finally:
            self._running = False

    def _verify(
        self,
        paths: Sequence[str | Path],
        sources: Sequence[tuple[str, str]],
    ) -> list[VerificationOutcome]:
        options = self.options
        delivered: list[VerificationOutcome] = []

        texts: list[tuple[str, str]] = []
        invalid: list[VerificationOutcome] = []
        for p in paths:
            try:
                texts.append((str(p), Path(p).read_text(encoding="utf-8")))
            except OSError as exc:
                invalid.append(
                    _invalid_outcome(
                        str(p),
                        [error(f"cannot read file: {exc}", Position(0, 0, str(p)))],
                    )
                )
        texts.extend(sources)

        program, invalid = _elaborate(texts, invalid)

        selected, skipped, unmatched = _select_targets(program, options.filters)
        if unmatched and not invalid:
            reasons = "; ".join(why for _, why in unmatched)
            raise ConfigurationError(reasons)

        if program is None or not selected:
            for outcome in invalid:
                self._deliver(outcome, delivered)
            for outcome in skipped:
                self._deliver(outcome, delivered)
            return delivered

        targets, invalid = self._translate(program, selected, invalid)

        for outcome in invalid:
            self._deliver(outcome, delivered)
        for outcome in skipped:
            self._deliver(outcome, delivered)

        try:
            config = discover_solver(options.solver)
        except ConfigurationError as exc:
            for target in targets:
                owner, _, routine = target.name.partition(".")
                self._deliver(
                    VerificationOutcome(owner, routine, "error", detail=str(exc)),
                    delivered,
                )
            return delivered

        if options.mode == "forked":
            self._run_forked(targets, config, delivered)
        else:
            self._run_bulk(targets, config, delivered)
        return delivered

    # -- translation -------------------------------------------------------------

    def _translate(
        self,
        program: TypedProgram,
        selected: list[tuple[str, ast.RoutineDecl]],
        invalid: list[VerificationOutcome],
    ) -> tuple[list[_Target], list[VerificationOutcome]]:
        options = self.options
        entries = [(owner, r.name) for owner, r in selected]
        result = translate_pool(
            program,
            TranslationOptions(invariant_defaults=options.invariant_defaults),
            entries=entries,
        )
        self.translation = result  # kept for --dump-ivl

        for name, diags in result.errors.items():
            owner, _, routine = name.partition(".")
            invalid.append(
                _invalid_outcome(owner, diags, routine=routine)
            )

        wanted = {f"{owner}.{r.name}" for owner, r in selected}
        procs = {p.name: p for p in result.ivl.procedures}
        targets: list[_Target] = []
        for name in result.targets:
            if name not in wanted:
                continue
            proc = procs[name]
            started = time.perf_counter()
            check_wellformed(proc, result.ivl)
            vc = wp(passify(cut_loops(proc, result.ivl)), result.ivl)
            build = time.perf_counter() - started
            targets.append(
                _Target(
                    name=name,
                    proc=proc,
                    vc=vc,
                    translation_time=result.times.get(name, 0.0) + build,
                    has_loops=_has_loops(proc.body),
                )
            )
        return targets, invalid

    # -- solving -----------------------------------------------------------------

    def _solve_target(self, target: _Target, config: SolverConfig) -> VerificationOutcome:
        options = self.options
        step_one = discharge_vc(
            target.vc,
            config,
            timeout=options.timeout,
            seed=options.seed,
            theory_path=options.theory_path,
        )
        solving = step_one.elapsed
        owner, _, routine = target.name.partition(".")

        if step_one.status == "verified":
            return VerificationOutcome(
                owner,
                routine,
                "verified",
                translation_time=target.translation_time,
                solving_time=solving,
            )
        if step_one.status in ("timeout", "error"):
            return VerificationOutcome(
                owner,
                routine,
                step_one.status,
                detail=step_one.message,
                translation_time=target.translation_time,
                solving_time=solving,
            )

        checks = tuple(
            FailedCheck(
                label=c.label,
                attribution=c.attribution,
                message=suggest(c.attribution),
                solver_status=c.status,
            )
            for c in step_one.failing
        )

        evidence: Optional[StepTwoEvidence] = None
        suggestions: tuple[str, ...] = ()
        if options.two_step and target.has_loops:
            evidence, second = self._step_two(target, config)
            solving += second
            if evidence.status in ("verified", "failed"):
                seen: list[str] = []
                for c in checks:
                    text = suggest(c.attribution, evidence)
                    if text and text not in seen:
                        seen.append(text)
                suggestions = tuple(seen)

        return VerificationOutcome(
            owner,
            routine,
            "failed",
            checks=checks,
            suggestions=suggestions,
            step_two=evidence,
            translation_time=target.translation_time,
            solving_time=solving,
        )

    def _step_two(
        self, target: _Target, config: SolverConfig
    ) -> tuple[StepTwoEvidence, float]:
        """Retry the routine with loops unrolled; never alters step one."""
        options = self.options
        try:
            unrolled = unroll_loops(
                target.proc, options.unroll_depth, self.translation.ivl
            )
            vc = wp(passify(unrolled), self.translation.ivl)
        except Exception:
            log.exception("step two VC construction failed for %s", target.name)
            return StepTwoEvidence(options.unroll_depth, "error"), 0.0
        outcome = discharge_vc(
            vc,
            config,
            timeout=options.timeout,
            seed=options.seed,
            theory_path=options.theory_path,
        )
        return (
            StepTwoEvidence(options.unroll_depth, outcome.status),
            outcome.elapsed,
        )

    def _run_bulk(
        self,
        targets: list[_Target],
        config: SolverConfig,
        delivered: list[VerificationOutcome],
    ) -> None:
        outcomes: list[VerificationOutcome] = []
        if self.options.jobs > 1 and len(targets) > 1:
            with ThreadPoolExecutor(max_workers=self.options.jobs) as pool:
                outcomes = list(
                    pool.map(lambda t: self._solve_target(t, config), targets)
                )
        else:
            outcomes = [self._solve_target(t, config) for t in targets]
        for outcome in outcomes:
            self._deliver(outcome, delivered)

    def _run_forked(
        self,
        targets: list[_Target],
        config: SolverConfig,
        delivered: list[VerificationOutcome],
    ) -> None:
        if not targets:
            return
        with ThreadPoolExecutor(max_workers=max(1, self.options.jobs)) as pool:
            pending: set[Future[VerificationOutcome]] = {
                pool.submit(self._solve_target, t, config) for t in targets
            }
            while pending:
                done, pending = wait(pending, return_when=FIRST_COMPLETED)
                for future in done:
                    self._deliver(future.result(), delivered)


# -- elaboration helpers -----------------------------------------------------------


def _invalid_outcome(
    class_name: str, diagnostics: Iterable[Diagnostic], routine: str = ""
) -> VerificationOutcome:
    return VerificationOutcome(
        class_name,
        routine,
        "invalid",
        diagnostics=tuple(diagnostics),
    )


def _elaborate(
    texts: list[tuple[str, str]],
    invalid: list[VerificationOutcome],
) -> tuple[Optional[TypedProgram], list[VerificationOutcome]]:
    """Parse and typecheck, converting rejected units into invalid
    outcomes and retrying without them so healthy units still verify."""
    invalid = list(invalid)
    units_by_path: dict[str, list[ast.ClassDecl]] = {}
    for path, text in texts:
        try:
            units_by_path[path] = parse_unit(text, path)
        except InputError as exc:
            invalid.append(_invalid_outcome(path, exc.diagnostics))

    remaining = list(units_by_path)
    while remaining:
        units = [u for p in remaining for u in units_by_path[p]]
        try:
            program = resolve_annotations(typecheck(units))
            return program, invalid
        except InputError as exc:
            failing = {
                d.position.path for d in exc.diagnostics if d.position.path in remaining
            }
            if not failing:
                # cannot localize; blame the first unit still standing
                failing = {remaining[0]}
            for path in sorted(failing):
                mine = [
                    d for d in exc.diagnostics if d.position.path == path
                ] or list(exc.diagnostics)
                invalid.append(_invalid_outcome(path, mine))
            remaining = [p for p in remaining if p not in failing]
    return None, invalid


def _select_targets(
    program: Optional[TypedProgram], filters: Sequence[str]
) -> tuple[
    list[tuple[str, ast.RoutineDecl]],
    list[VerificationOutcome],
    list[tuple[str, str]],
]:
    """Resolve filters to (owner, routine) pairs.

    Returns the executable targets, `skipped` outcomes for selected
    routines that have nothing to prove, and unmatched filter entries.
    """
    if program is None:
        return [], [], []
    units = {u.name: u for u in program.user_units()}

    chosen: list[tuple[str, ast.RoutineDecl]] = []
    unmatched: list[tuple[str, str]] = []
    if not filters:
        for unit in program.user_units():
            for r in unit.routines:
                chosen.append((unit.name, r))
    else:
        seen: set[tuple[str, str]] = set()

        def add(owner: str, r: ast.RoutineDecl) -> None:
            if (owner, r.name) not in seen:
                seen.add((owner, r.name))
                chosen.append((owner, r))

        for entry in filters:
            cls, _, routine = entry.partition(".")
            unit = units.get(cls)
            if unit is None:
                unmatched.append((entry, f"filter matches no class: '{cls}'"))
                continue
            if routine:
                r = unit.routine(routine)
                if r is None:
                    unmatched.append(
                        (entry, f"class '{cls}' has no routine '{routine}'")
                    )
                    continue
                add(cls, r)
            else:
                for r in unit.routines:
                    add(cls, r)

    targets: list[tuple[str, ast.RoutineDecl]] = []
    skipped: list[VerificationOutcome] = []
    for owner, r in chosen:
        if r.is_skipped:
            skipped.append(
                VerificationOutcome(
                    owner, r.name, "skipped", detail="marked 'status: skip'"
                )
            )
        elif r.body is None:
            skipped.append(
                VerificationOutcome(
                    owner, r.name, "skipped", detail="no executable body"
                )
            )
        else:
            targets.append((owner, r))
    return targets, skipped, unmatched

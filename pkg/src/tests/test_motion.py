from unittest import TestCase

from sourir.analysis import check_program
from sourir.errors import (
    BadDeoptTargetError,
    CompositionNestingError,
    MoveConditionViolatedError,
    NotAnAssumeError,
    OutOfScopeError,
    PredIndexOutOfRangeError,
    TargetNotAssumeError,
    UnboundVariableError,
)
from sourir.fixtures import load_fixture
from sourir.interp import Configuration, ForcePolicy, InputCursor, run, step
from sourir.ir import NIL, Assume, IntLit, Location, Program
from sourir.passes import (
    available_predicates,
    compose_assume,
    hoist_predicate,
    inject_predicate,
    move_assume,
    remove_trivial_assume,
    snapshot_var,
)
from sourir.text import parse, parse_expression, render_instruction

_GOTO_PROGRAM = (
    "func main()\n"
    "version V1\n  L0: var x = 1\n  L1: assume x == 1 else main.V0.L1 [x = x]\n  L2: goto L3\n  L3: print x\n  stop\n"
    "version V0\n  L0: var x = 1\n  L1: print x\n  stop\n"
)

_KILLED_PROGRAM = (
    "func main()\n"
    "version V1\n  L0: var n = 1\n  L1: assume true else main.V0.L1 [n = n]\n  L2: n <- 2\n"
    "  L3: assume n != 0 else main.V0.L3 [n = n]\n  L4: print n\n  stop\n"
    "version V0\n  L0: var n = 1\n  L1: n <- 2\n  L3: print n\n  stop\n"
)


_GUARDED_PROGRAM = (
    "func main()\n"
    "version V1\n  L0: var x = nil\n  L1: assume true else main.V0.L1 [x = x]\n  L2: branch x == nil L5 L3\n"
    "  L3: assume x < 3 else main.V0.L3 [x = x]\n  L4: print x\n  stop\n  L5: print 7\n  stop\n"
    "version V0\n  L0: var x = nil\n  L1: branch x == nil L5 L3\n  L3: print x\n  stop\n  L5: print 7\n  stop\n"
)


def _snapshotted() -> Program:
    program, _ = snapshot_var(load_fixture("fig7_move"), "size", "Vany", "L2", "x")
    return program


def _state_after_deopts(program: Program, deopts: int) -> tuple[object, ...]:
    config, inputs = Configuration.start(program), InputCursor()
    while config.deopts < deopts and not config.terminated:
        step(config, inputs, policy=ForcePolicy.always())
    return config.deopts, config.frames(), config.heap.snapshot()


class SnapshotTestCase(TestCase):
    """Snapshotting variables read by deoptimization metadata."""

    def test_copy_takes_label(self) -> None:
        """The copy is declared at the assume's label and the metadata reads it."""
        program, report = snapshot_var(load_fixture("fig7_move"), "size", "Vany", "L2", "x")
        instrs = program.stream("size", "Vany")
        self.assertEqual(render_instruction(instrs.lookup("L2")), "var x0 = x")
        self.assertEqual(render_instruction(instrs.lookup("L2_1")), "assume true else size.Vb.L3 [el = el, x = x0]")
        self.assertEqual(report.notes, ("snapshot x as x0",))
        self.assertEqual(check_program(program), [])

    def test_not_in_scope(self) -> None:
        """Only variables in scope can be copied."""
        with self.assertRaises(UnboundVariableError):
            snapshot_var(load_fixture("fig7_move"), "size", "Vany", "L2", "l")

    def test_not_an_assume(self) -> None:
        """Snapshots are taken in front of assumes only."""
        with self.assertRaises(NotAnAssumeError):
            snapshot_var(load_fixture("fig7_move"), "size", "Vany", "L3", "x")


class MoveAssumeTestCase(TestCase):
    """Moving assumes past the following instruction."""

    def test_write_of_mentioned_variable(self) -> None:
        """An assume cannot move past an update of a variable its metadata reads."""
        with self.assertRaises(MoveConditionViolatedError) as ctx:
            move_assume(load_fixture("fig7_move"), "size", "Vany", "L2")
        self.assertEqual(ctx.exception.condition, 2)

    def test_effectful_successor(self) -> None:
        """An assume cannot move past an instruction with effects."""
        with self.assertRaises(MoveConditionViolatedError) as ctx:
            move_assume(load_fixture("fig13_undo"), "undo", "Vs123", "L1")
        self.assertEqual(ctx.exception.condition, 1)

    def test_move_after_snapshot(self) -> None:
        """Once the metadata reads a snapshot, the assume moves past the update."""
        program, report = move_assume(_snapshotted(), "size", "Vany", "L2_1")
        self.assertEqual(program.stream("size", "Vany").labels, ("L0", "L1", "L2", "L3", "L2_1", "L5", "L4"))
        self.assertTrue(report.changed)
        self.assertEqual(check_program(program), [])

    def test_predicate_after_move(self) -> None:
        """A predicate on the updated variable deoptimizes to a state that redoes the update."""
        program, _ = move_assume(_snapshotted(), "size", "Vany", "L2_1")
        program = inject_predicate(program, "size", "Vany", "L2_1", parse_expression("x == 1"))
        self.assertEqual(
            render_instruction(program.stream("size", "Vany").lookup("L2_1")),
            "assume x == 1 else size.Vb.L3 [el = el, x = x0]",
        )
        original = load_fixture("fig7_move")
        for value in (NIL, IntLit(1), IntLit(2), IntLit(3)):
            with self.subTest(k=value):
                self.assertEqual(run(program, [value]).trace, run(original, [value]).trace)

    def test_move_past_goto(self) -> None:
        """Past a goto the assume lands on the goto's target."""
        program, _ = move_assume(parse(_GOTO_PROGRAM), "main", "V1", "L1")
        instrs = program.stream("main", "V1")
        self.assertEqual(instrs.labels, ("L0", "L2", "L3", "L3_1", "_4"))
        self.assertIsInstance(instrs.lookup("L3"), Assume)
        self.assertEqual(run(program).trace, run(parse(_GOTO_PROGRAM)).trace)


class HoistPredicateTestCase(TestCase):
    """Hoisting loop-invariant predicates."""

    def test_available_in_loop(self) -> None:
        """A predicate checked at the loop head is available on every iteration."""
        program, _ = hoist_predicate(load_fixture("hoist_loop"), "count", "Vopt", "L3", "L0", 0)
        available = available_predicates(program, "count", "Vopt")
        self.assertIn(parse_expression("n != 0"), available["L3"])
        self.assertEqual(available["L0"], frozenset())

    def test_hoist_out_of_loop(self) -> None:
        """The predicate moves to the entry assume and the loop assume becomes trivial."""
        original = load_fixture("hoist_loop")
        program, report = hoist_predicate(original, "count", "Vopt", "L3", "L0", 0)
        instrs = program.stream("count", "Vopt")
        self.assertEqual(render_instruction(instrs.lookup("L0")), "assume n != 0 else count.Vbase.L1 [n = n]")
        self.assertTrue(instrs.lookup("L3").is_trivial)
        self.assertTrue(report.changed)
        program, _ = remove_trivial_assume(program, "count", "Vopt", "L3")
        self.assertEqual(check_program(program), [])
        for value in (0, 1, 3):
            with self.subTest(n=value):
                self.assertEqual(run(program, [IntLit(value)]).trace, run(original, [IntLit(value)]).trace)

    def test_hoisted_guard_deoptimizes(self) -> None:
        """A zero count now leaves the optimized version at its entry."""
        program, _ = hoist_predicate(load_fixture("hoist_loop"), "count", "Vopt", "L3", "L0", 0)
        config, inputs = Configuration.start(program), InputCursor([IntLit(0)])
        while config.deopts == 0:
            step(config, inputs)
        self.assertEqual(config.location, Location("count", "Vbase", "L1"))

    def test_rolled_back(self) -> None:
        """A predicate whose variable is written in between is not hoisted."""
        program = parse(_KILLED_PROGRAM)
        result, report = hoist_predicate(program, "main", "V1", "L3", "L1", 0)
        self.assertEqual(result, program)
        self.assertFalse(report.changed)
        self.assertEqual(report.notes, ("rolled back",))

    def test_failing_predicate_not_hoisted(self) -> None:
        """A predicate that can fail to evaluate stays behind the branch that protects it."""
        program = parse(_GUARDED_PROGRAM)
        self.assertEqual(check_program(program), [])
        result, report = hoist_predicate(program, "main", "V1", "L3", "L1", 0)
        self.assertEqual(result, program)
        self.assertFalse(report.changed)
        self.assertEqual(report.notes, ("rolled back",))
        self.assertEqual(run(result).trace, run(program).trace)
        self.assertTrue(run(result).stopped)

    def test_index_out_of_range(self) -> None:
        """The index addresses a predicate of the source assume."""
        with self.assertRaises(PredIndexOutOfRangeError):
            hoist_predicate(load_fixture("hoist_loop"), "count", "Vopt", "L3", "L0", 1)

    def test_out_of_scope(self) -> None:
        """Predicates are not hoisted above the declaration of their variables."""
        program = inject_predicate(load_fixture("hoist_loop"), "count", "Vopt", "L3", parse_expression("i != 5"))
        with self.assertRaises(OutOfScopeError):
            hoist_predicate(program, "count", "Vopt", "L3", "L0", 1)


class ComposeAssumeTestCase(TestCase):
    """Composing chained assumes."""

    def test_compose_pair(self) -> None:
        """Inner predicates and varmap are rewritten through the outer varmap."""
        program, report = compose_assume(load_fixture("compose_pair"), "f", "V3", "L1")
        self.assertEqual(
            render_instruction(program.stream("f", "V3").lookup("L1")),
            "assume z == 5, 1 != 0 else f.V0.Lb [y = 1]",
        )
        self.assertEqual(report.notes, ("now targets f.V0.Lb",))
        self.assertEqual(run(program).trace, run(load_fixture("compose_pair")).trace)

    def test_chain_collapses(self) -> None:
        """Composing twice makes the most speculative version deoptimize straight to the base."""
        program, _ = compose_assume(load_fixture("fig13_undo"), "undo", "Vs123", "L1")
        program, _ = compose_assume(program, "undo", "Vs123", "L1")
        assume = program.stream("undo", "Vs123").lookup("L1")
        self.assertEqual(
            render_instruction(assume).split(" else ")[1],
            "undo.Vbase.L1 [a = b - 1, c = b]",
        )
        config, inputs = Configuration.start(program), InputCursor([IntLit(0)])
        while config.version != "Vbase":
            step(config, inputs)
        self.assertEqual(config.env, {"a": IntLit(0), "c": IntLit(1)})
        self.assertEqual(config.deopts, 1)
        self.assertEqual(run(program, [IntLit(0)]).trace, run(load_fixture("fig13_undo"), [IntLit(0)]).trace)

    def test_inner_frames(self) -> None:
        """The target's extra frames are kept and one deoptimization lands where two did."""
        original = load_fixture("compose_frames")
        program, _ = compose_assume(original, "main", "V2", "Lg")
        self.assertEqual(
            render_instruction(program.stream("main", "V2").lookup("Lg")),
            "assume x != nil else size.Vb.L2 [el = 32, x = x], main.Vb.Lret ret s [pl = pl, vec = vec]",
        )
        self.assertEqual(check_program(program), [])
        one_step = _state_after_deopts(program, 1)
        self.assertEqual(one_step, (1, *_state_after_deopts(original, 2)[1:]))
        _, frames, _ = one_step
        self.assertEqual([frame[:4] for frame in frames], [("size", "Vb", "L2", None), ("main", "Vb", "Lret", "s")])
        self.assertEqual(run(program).trace, run(original).trace)

    def test_outer_frames(self) -> None:
        """Frames of the outer assume stay below the ones the target synthesizes."""
        original = load_fixture("compose_frames").with_active_version("main", "V3")
        program, _ = compose_assume(original, "main", "V3", "Lg")
        self.assertEqual(
            render_instruction(program.stream("main", "V3").lookup("Lg")),
            "assume x != nil else size.Vb.L2 [el = 32, x = x], main.Vb.Lret ret s [pl = pl, vec = vec]",
        )
        self.assertEqual(_state_after_deopts(program, 1)[1:], _state_after_deopts(original, 2)[1:])

    def test_target_not_assume(self) -> None:
        """The target of the outer assume must be an assume."""
        with self.assertRaises(TargetNotAssumeError):
            compose_assume(load_fixture("fig13_undo"), "undo", "Vs1", "L1")

    def test_nesting(self) -> None:
        """Substituting an operation into an operand is refused."""
        program = parse(
            "func main()\n"
            "version V2\n  L0: var b = 1\n  L1: assume true else main.V1.L1 [a = b + 1]\n  stop\n"
            "version V1\n  L0: var a = 1\n  L1: assume a != 0 else main.V0.L1 [a = a]\n  stop\n"
            "version V0\n  L0: var a = 1\n  L1: stop\n",
        )
        with self.assertRaises(CompositionNestingError):
            compose_assume(program, "main", "V2", "L1")

    def test_missing_target(self) -> None:
        """The target location must exist."""
        program = parse("func main()\nversion V0\n  L0: assume true else main.V9.L1 []\n  stop\n")
        with self.assertRaises(BadDeoptTargetError):
            compose_assume(program, "main", "V0", "L0")

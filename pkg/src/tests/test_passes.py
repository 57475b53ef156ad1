from unittest import TestCase

from sourir.analysis import check_program
from sourir.errors import (
    BadDeoptTargetError,
    DuplicateVersionLabelError,
    NotACallError,
    NotAnAssumeError,
    NotTrivialError,
    UnboundVariableError,
    VersionInUseError,
)
from sourir.fixtures import load_fixture
from sourir.interp import PrintAction, StopAction, run
from sourir.ir import (
    FALSE,
    NIL,
    TRUE,
    Assume,
    DeoptTarget,
    Goto,
    IntLit,
    Op,
    Primop,
    Program,
    Var,
    Varmap,
    same_modulo_labels,
)
from sourir.passes import (
    AbstractEnv,
    Const,
    NotConst,
    analyze_constants,
    constant_propagate,
    create_version,
    discard_version,
    fold_branches,
    fold_expr,
    inject_predicate,
    inline,
    insert_assume,
    remove_dead_vars,
    remove_trivial_assume,
    remove_unreachable,
)
from sourir.text import parse, parse_expression, render_instruction


def _size_with_guard() -> tuple[Program, str, str]:
    program = create_version(load_fixture("fig5_base"), "size", "Vo")
    return insert_assume(program, "size", "Vo", "L2"), "size", "Vo"


class CreateVersionTestCase(TestCase):
    """Copying the active version."""

    def test_copy_becomes_active(self) -> None:
        """The copy is listed first and equals its source."""
        program = create_version(load_fixture("fig5_base"), "size", "Vo")
        size = program.function("size")
        self.assertEqual(size.version_labels, ("Vo", "Vb"))
        self.assertEqual(size.version("Vo"), size.version("Vb"))

    def test_copied_assumes_target_source(self) -> None:
        """Assumes of the copy deoptimize to the same label of the source with identity varmaps."""
        program = create_version(load_fixture("fig13_undo"), "undo", "Vnew")
        assume = program.stream("undo", "Vnew").lookup("L1")
        self.assertIsInstance(assume, Assume)
        self.assertEqual(assume.target, DeoptTarget("undo", "Vs123", "L1", Varmap.identity(["a", "b"])))

    def test_seeds(self) -> None:
        """Seed labels receive a trivial assume."""
        program = create_version(load_fixture("fig5_base"), "size", "Vo", seeds=["L2"])
        self.assertEqual(
            render_instruction(program.stream("size", "Vo").lookup("L2")),
            "assume true else size.Vb.L2 [el = el, x = x]",
        )

    def test_duplicate_label(self) -> None:
        """Version labels stay unique."""
        with self.assertRaises(DuplicateVersionLabelError):
            create_version(load_fixture("fig5_base"), "size", "Vb")


class AssumeEditingTestCase(TestCase):
    """Inserting, strengthening and removing assumes."""

    def test_insert_assume(self) -> None:
        """The guard takes over the label and the displaced instruction follows it."""
        program, function, version = _size_with_guard()
        instrs = program.stream(function, version)
        self.assertEqual(
            instrs.lookup("L2"),
            Assume((TRUE,), DeoptTarget("size", "Vb", "L2", Varmap.identity(["el", "x"]))),
        )
        self.assertEqual(instrs.next_label("L2"), "L2_1")
        self.assertEqual(render_instruction(instrs.lookup("L2_1")), "branch x == nil L4 L3")
        self.assertEqual(check_program(program), [])

    def test_insert_without_target(self) -> None:
        """A version with nothing after it cannot get an assume."""
        with self.assertRaises(BadDeoptTargetError):
            insert_assume(load_fixture("fig5_base"), "size", "Vb", "L2")

    def test_inject_replaces_true(self) -> None:
        """Injecting into `assume true` leaves only the new predicate."""
        program, function, version = _size_with_guard()
        program = inject_predicate(program, function, version, "L2", parse_expression("x != nil"))
        self.assertEqual(program.stream(function, version).lookup("L2").predicates, (parse_expression("x != nil"),))
        program = inject_predicate(program, function, version, "L2", parse_expression("el == 32"))
        self.assertEqual(len(program.stream(function, version).lookup("L2").predicates), 2)

    def test_inject_out_of_scope(self) -> None:
        """Predicates only mention variables in scope."""
        program, function, version = _size_with_guard()
        with self.assertRaises(UnboundVariableError):
            inject_predicate(program, function, version, "L2", parse_expression("l == 1"))

    def test_inject_not_an_assume(self) -> None:
        """Predicates go into assumes only."""
        program, function, version = _size_with_guard()
        with self.assertRaises(NotAnAssumeError):
            inject_predicate(program, function, version, "L1", TRUE)

    def test_remove_trivial(self) -> None:
        """Removing the only trivial assume gives back the source version."""
        program, function, version = _size_with_guard()
        removed, report = remove_trivial_assume(program, function, version, "L2")
        self.assertTrue(same_modulo_labels(removed.stream(function, version), removed.stream(function, "Vb")))
        self.assertTrue(report.changed)

    def test_remove_not_trivial(self) -> None:
        """Assumes with real predicates stay."""
        program, function, version = _size_with_guard()
        program = inject_predicate(program, function, version, "L2", parse_expression("x != nil"))
        with self.assertRaises(NotTrivialError):
            remove_trivial_assume(program, function, version, "L2")


class DiscardVersionTestCase(TestCase):
    """Retiring versions."""

    def test_discard_unused(self) -> None:
        """An unreferenced version goes away and the next one becomes active."""
        program, _ = discard_version(load_fixture("fig13_undo"), "undo", "Vs123")
        self.assertEqual(program.function("undo").version_labels, ("Vs12", "Vs1", "Vbase"))
        self.assertEqual(check_program(program), [])

    def test_discard_target(self) -> None:
        """Versions named by metadata elsewhere are kept."""
        with self.assertRaises(VersionInUseError):
            discard_version(load_fixture("fig13_undo"), "undo", "Vbase")

    def test_discard_only_version(self) -> None:
        """A function keeps at least one version."""
        with self.assertRaises(VersionInUseError):
            discard_version(load_fixture("fig2"), "main", "V0")


class ConstantPropagationTestCase(TestCase):
    """Speculative constant propagation."""

    def test_fold_expr(self) -> None:
        """Known constants are substituted and evaluated."""
        env = AbstractEnv({"x": Const(IntLit(2)), "y": NotConst(NIL)})
        self.assertEqual(fold_expr(parse_expression("x + 1"), env), IntLit(3))
        self.assertEqual(fold_expr(parse_expression("y == nil"), env), FALSE)
        self.assertEqual(fold_expr(parse_expression("nil != y"), env), TRUE)
        self.assertEqual(fold_expr(parse_expression("z * x"), env), Primop(Op.MUL, (Var("z"), IntLit(2))))

    def test_failing_operation_kept(self) -> None:
        """Folding never hides a runtime error."""
        self.assertEqual(fold_expr(parse_expression("1 / 0"), AbstractEnv()), parse_expression("1 / 0"))

    def test_assume_facts(self) -> None:
        """Equalities and inequalities checked by an assume hold after it."""
        program, function, version = _size_with_guard()
        program = inject_predicate(program, function, version, "L2", parse_expression("x != nil"))
        facts = analyze_constants(program, function, version)
        self.assertEqual(facts["L2"].lookup("el"), Const(IntLit(32)))
        self.assertEqual(facts["L2_1"].lookup("x"), NotConst(NIL))

    def test_join_forgets_disagreement(self) -> None:
        """Facts differing between incoming edges are dropped."""
        left = AbstractEnv({"x": Const(IntLit(1)), "y": Const(TRUE)})
        right = AbstractEnv({"x": Const(IntLit(2)), "y": Const(TRUE)})
        self.assertEqual(left.join(right), AbstractEnv({"y": Const(TRUE)}))

    def test_propagate_into_metadata(self) -> None:
        """Constants are folded into branches, returns and varmaps."""
        program, function, version = _size_with_guard()
        program = inject_predicate(program, function, version, "L2", parse_expression("x != nil"))
        program, report = constant_propagate(program, function, version)
        instrs = program.stream(function, version)
        self.assertEqual(
            render_instruction(instrs.lookup("L2")),
            "assume x != nil else size.Vb.L2 [el = 32, x = x]",
        )
        self.assertEqual(render_instruction(instrs.lookup("L2_1")), "branch false L4 L3")
        self.assertEqual(report.rewrites, 3)


class CleanupTestCase(TestCase):
    """Branch folding and dead code removal."""

    def test_fold_branches(self) -> None:
        """Branches on literals become gotos."""
        program = parse("func main()\nversion V0\n  branch true L1 L2\n  L1: stop\n  L2: stop\n")
        program, report = fold_branches(program, "main", "V0")
        self.assertEqual(program.stream("main", "V0").lookup("_0"), Goto("L1"))
        self.assertEqual(report.rewrites, 1)

    def test_remove_unreachable(self) -> None:
        """Unreachable instructions and jumps to the next instruction disappear."""
        program = parse("func main()\nversion V0\n  goto L1\n  L1: print 1\n  stop\n  L2: print 2\n  stop\n")
        program, _ = remove_unreachable(program, "main", "V0")
        self.assertEqual(program.stream("main", "V0").labels, ("L1", "_2"))

    def test_deopt_entries_reachable(self) -> None:
        """Labels entered by deoptimization are roots."""
        program = parse(
            "func main()\nversion V1\n  var y = 1\n  assume true else main.V0.L1 [y = y]\n  stop\n"
            "version V0\n  L0: stop\n  L1: print y\n  stop\n",
        )
        result, _ = remove_unreachable(program, "main", "V0")
        self.assertEqual(result.stream("main", "V0").labels, ("L0", "L1", "_2"))

    def test_remove_dead_vars(self) -> None:
        """Unused effect-free declarations go away with their drops."""
        program = parse("func main()\nversion V0\n  var x = 1\n  var y = 2\n  print y\n  drop x\n  stop\n")
        program, report = remove_dead_vars(program, "main", "V0")
        rendered = [render_instruction(instr) for _, instr in program.stream("main", "V0")]
        self.assertEqual(rendered, ["var y = 2", "print y", "stop"])
        self.assertEqual(report.rewrites, 2)

    def test_metadata_counts_as_use(self) -> None:
        """Variables read by deoptimization metadata stay alive."""
        program, function, version = _size_with_guard()
        result, report = remove_dead_vars(program, function, version)
        self.assertEqual(result, program)
        self.assertFalse(report.changed)

    def test_size_specialization(self) -> None:
        """Guarding, propagating and cleaning up the size function yields the specialized version."""
        program, function, version = _size_with_guard()
        program = inject_predicate(program, function, version, "L2", parse_expression("x != nil"))
        for transform in (constant_propagate, fold_branches, remove_unreachable, remove_dead_vars):
            program, _ = transform(program, function, version)
        expected = load_fixture("fig5_vo").stream("size", "Vo")
        self.assertTrue(same_modulo_labels(program.stream(function, version), expected))


class InlineTestCase(TestCase):
    """Inlining with caller frame synthesis."""

    def setUp(self) -> None:
        self.program = create_version(load_fixture("fig8_base"), "main", "Vinl")

    def test_inline_size(self) -> None:
        """Inlining the specialized size reproduces the hand-inlined caller."""
        result, report = inline(self.program, "main", "Vinl", "Lcall")
        expected = load_fixture("fig8").stream("main", "Vinl")
        self.assertTrue(same_modulo_labels(result.stream("main", "Vinl"), expected))
        self.assertEqual(check_program(result), [])
        self.assertEqual(report.notes, ("inlined size",))

    def test_inlined_trace(self) -> None:
        """The inlined program prints what the original prints."""
        result, _ = inline(self.program, "main", "Vinl", "Lcall")
        self.assertEqual(run(result).trace, (PrintAction(IntLit(128)), StopAction()))
        self.assertEqual(run(result).trace, run(self.program).trace)

    def test_renames_clashing_names(self) -> None:
        """Inlinee variables that clash with the caller's get fresh names."""
        program = parse(
            "func main()\nversion V1\n  var x = 2\n  L1: call r = &f(x)\n  print r\n  stop\n"
            "version V0\n  var x = 2\n  L1: call r = &f(x)\n  print r\n  stop\n\n"
            "func f(x)\nversion V0\n  var r = x + 1\n  return r\n",
        )
        result, _ = inline(program, "main", "V1", "L1")
        self.assertEqual(check_program(result), [])
        self.assertIn("var x_1 = x", [render_instruction(i) for _, i in result.stream("main", "V1")])
        self.assertEqual(run(result).trace, run(program).trace)

    def test_not_a_call(self) -> None:
        """Only calls can be inlined."""
        with self.assertRaises(NotACallError):
            inline(self.program, "main", "Vinl", "Lret")

    def test_no_frame_version(self) -> None:
        """Inlining code with assumes needs a caller version to return into."""
        with self.assertRaises(BadDeoptTargetError):
            inline(load_fixture("fig8_base"), "main", "Vb", "Lcall")

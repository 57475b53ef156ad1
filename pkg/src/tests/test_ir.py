from unittest import TestCase

from sourir.errors import (
    DuplicateNameError,
    FallThroughEndError,
    InvalidProgramError,
    UnknownFunctionError,
    UnknownLabelError,
    UnknownVersionError,
)
from sourir.fixtures import load_fixture
from sourir.ir import (
    INT_MAX,
    INT_MIN,
    NIL,
    TRUE,
    Assume,
    DeoptTarget,
    Drop,
    Function,
    Goto,
    InstructionStream,
    IntLit,
    Location,
    NameSupply,
    Op,
    Primop,
    Print,
    Program,
    Stop,
    Var,
    VarDecl,
    Varmap,
    Version,
    free_vars,
    fresh_name,
    same_modulo_labels,
)
from sourir.ir.expressions import substitute


class LiteralTestCase(TestCase):
    """Literals and free variables."""

    def test_int_range(self) -> None:
        """Integer literals are bounded to signed 64 bits."""
        self.assertEqual(IntLit(INT_MAX).value, 2**63 - 1)
        self.assertEqual(IntLit(INT_MIN).value, -(2**63))
        with self.assertRaises(InvalidProgramError):
            IntLit(INT_MAX + 1)
        with self.assertRaises(InvalidProgramError):
            IntLit(True)  # noqa: FBT003

    def test_free_vars(self) -> None:
        """Free variables of an operation are its variable operands."""
        self.assertEqual(free_vars(Primop(Op.ADD, (Var("x"), IntLit(1)))), frozenset({"x"}))
        self.assertEqual(free_vars(NIL), frozenset())


class SubstituteTestCase(TestCase):
    """Variable substitution in expressions."""

    def test_simple_replacement(self) -> None:
        """Operands may be replaced by simple expressions."""
        expr = Primop(Op.NEQ, (Var("x"), IntLit(0)))
        self.assertEqual(substitute(expr, {"x": IntLit(1)}), Primop(Op.NEQ, (IntLit(1), IntLit(0))))

    def test_whole_expression(self) -> None:
        """A bare variable may become an operation."""
        replacement = Primop(Op.SUB, (Var("b"), IntLit(1)))
        self.assertEqual(substitute(Var("a"), {"a": replacement}), replacement)

    def test_nesting_refused(self) -> None:
        """Substituting an operation into an operand would nest and is refused."""
        replacement = Primop(Op.SUB, (Var("b"), IntLit(1)))
        self.assertIsNone(substitute(Primop(Op.ADD, (Var("a"), IntLit(1))), {"a": replacement}))


class VarmapTestCase(TestCase):
    """Varmap construction and queries."""

    def test_duplicate_names(self) -> None:
        """A varmap binds each name once."""
        with self.assertRaises(InvalidProgramError):
            Varmap((("x", IntLit(1)), ("x", IntLit(2))))

    def test_identity_is_sorted(self) -> None:
        """Identity varmaps list names in sorted order."""
        varmap = Varmap.identity(["x", "el"])
        self.assertEqual(varmap.names, ("el", "x"))
        self.assertEqual(varmap.as_dict(), {"el": Var("el"), "x": Var("x")})

    def test_uses(self) -> None:
        """Variables used by a varmap are those of its expressions."""
        varmap = Varmap((("a", Primop(Op.SUB, (Var("b"), IntLit(1)))), ("c", IntLit(3))))
        self.assertEqual(varmap.uses(), frozenset({"b"}))


class InstructionStreamTestCase(TestCase):
    """Label lookup and editing of instruction streams."""

    def setUp(self) -> None:
        self.instrs = InstructionStream.of([("L0", Print(IntLit(1))), ("L1", Goto("L2")), ("L2", Stop())])

    def test_lookup(self) -> None:
        """Labels resolve to positions and instructions."""
        self.assertEqual(self.instrs.entry, "L0")
        self.assertEqual(self.instrs.index_of("L2"), 2)
        self.assertEqual(self.instrs.lookup("L1"), Goto("L2"))
        self.assertEqual(self.instrs.next_label("L0"), "L1")

    def test_unknown_label(self) -> None:
        """Looking up a missing label raises."""
        with self.assertRaises(UnknownLabelError):
            self.instrs.lookup("L9")

    def test_fall_through_end(self) -> None:
        """The last instruction has no successor in stream order."""
        with self.assertRaises(FallThroughEndError):
            self.instrs.next_label("L2")

    def test_duplicate_label(self) -> None:
        """Labels are unique within a stream."""
        with self.assertRaises(DuplicateNameError):
            InstructionStream.of([("L0", Stop()), ("L0", Stop())])

    def test_successors(self) -> None:
        """Jumps go to their target, stop goes nowhere."""
        self.assertEqual(self.instrs.successors("L0"), frozenset({"L1"}))
        self.assertEqual(self.instrs.successors("L1"), frozenset({"L2"}))
        self.assertEqual(self.instrs.successors("L2"), frozenset())

    def test_predecessors_with_open_end(self) -> None:
        """A last instruction that falls through adds no edge and does not hide the others."""
        instrs = InstructionStream.of([("L0", Goto("L2")), ("L1", Stop()), ("L2", Print(IntLit(1)))])
        self.assertEqual(list(instrs.edges()), [("L0", "L2")])
        self.assertEqual(instrs.predecessors("L2"), frozenset({"L0"}))
        self.assertEqual(instrs.predecessors("L1"), frozenset())

    def test_splice(self) -> None:
        """Splicing replaces a slice and keeps the rest."""
        edited = self.instrs.splice(1, [("L1", Print(IntLit(2)))], remove=1)
        self.assertEqual(edited.labels, ("L0", "L1", "L2"))
        self.assertEqual(edited.lookup("L1"), Print(IntLit(2)))
        self.assertEqual(self.instrs.lookup("L1"), Goto("L2"))


class ProgramTestCase(TestCase):
    """Functions, versions and program-wide queries."""

    def test_versions(self) -> None:
        """The first version is active and versions are listed in order."""
        program = load_fixture("fig13_undo")
        undo = program.function("undo")
        self.assertEqual(undo.active.label, "Vs123")
        self.assertEqual(undo.version_labels, ("Vs123", "Vs12", "Vs1", "Vbase"))
        self.assertEqual(undo.version_after("Vs12"), "Vs1")
        self.assertIsNone(undo.version_after("Vbase"))

    def test_with_active_version(self) -> None:
        """Activating a version moves it first without changing the others."""
        program = load_fixture("fig4_show").with_active_version("show", "Vw")
        self.assertEqual(program.function("show").version_labels[0], "Vw")
        self.assertEqual(set(program.function("show").version_labels), {"Vo", "Vw", "Vb"})

    def test_unknown_names(self) -> None:
        """Missing functions and versions raise their own errors."""
        program = load_fixture("fig2")
        with self.assertRaises(UnknownFunctionError):
            program.function("size")
        with self.assertRaises(UnknownVersionError):
            program.stream("main", "V9")

    def test_duplicate_function(self) -> None:
        """Function names are unique in a program."""
        main = Function("main", (), (Version("V0", InstructionStream.of([("L0", Stop())])),))
        with self.assertRaises(DuplicateNameError):
            Program((main, main))

    def test_assume_sites(self) -> None:
        """Every assume is listed with its location."""
        sites = [site for site, _ in load_fixture("fig13_undo").assumes()]
        self.assertEqual([str(site) for site in sites], ["undo.Vs123.L1", "undo.Vs12.L1", "undo.Vs1.L1"])

    def test_deopt_entries(self) -> None:
        """Deoptimization entries map a target location to the sites landing there."""
        entries = load_fixture("fig13_undo").deopt_entries()
        self.assertIn(Location("undo", "Vbase", "L1"), entries)
        [(site, _)] = entries[Location("undo", "Vbase", "L1")]
        self.assertEqual(site, Location("undo", "Vs1", "L1"))


class AssumeTestCase(TestCase):
    """Assume instructions."""

    def test_trivial(self) -> None:
        """Assumes with only `true` predicates, or none, can never fail."""
        target = DeoptTarget("f", "V0", "L0", Varmap(()))
        self.assertTrue(Assume((TRUE,), target).is_trivial)
        self.assertTrue(Assume((), target).is_trivial)
        self.assertFalse(Assume((Primop(Op.EQ, (Var("x"), IntLit(1))),), target).is_trivial)


class NamesTestCase(TestCase):
    """Fresh name generation."""

    def test_fresh_name(self) -> None:
        """Fresh names keep the base when free and add the smallest free suffix otherwise."""
        self.assertEqual(fresh_name("x", {"y"}), "x")
        self.assertEqual(fresh_name("x", {"x", "x_1"}), "x_2")

    def test_name_supply(self) -> None:
        """A name supply never hands out the same name twice."""
        supply = NameSupply({"l"})
        self.assertEqual([supply.fresh("l"), supply.fresh("l")], ["l_1", "l_2"])
        self.assertIn("l_1", supply)


class SameModuloLabelsTestCase(TestCase):
    """Stream comparison up to label renaming."""

    def test_renamed_labels(self) -> None:
        """Streams differing only in their labels compare equal."""
        left = InstructionStream.of([("A", Goto("B")), ("B", Stop())])
        right = InstructionStream.of([("X", Goto("Y")), ("Y", Stop())])
        self.assertTrue(same_modulo_labels(left, right))

    def test_different_jump(self) -> None:
        """Jumps must agree under the positional matching."""
        left = InstructionStream.of([("A", Goto("A")), ("B", Stop())])
        right = InstructionStream.of([("X", Goto("Y")), ("Y", Stop())])
        self.assertFalse(same_modulo_labels(left, right))

    def test_renamed_declarations(self) -> None:
        """Streams differing only in the names they declare compare equal."""
        def stream(name: str, *labels: str) -> InstructionStream:
            body = (VarDecl(name, IntLit(1)), Print(Primop(Op.ADD, (Var(name), Var("n")))), Drop(name))
            return InstructionStream.of(list(zip(labels, body, strict=True)))

        self.assertTrue(same_modulo_labels(stream("x0", "A", "B", "C"), stream("x_1", "X", "Y", "Z")))

    def test_swapped_uses(self) -> None:
        """Uses must follow the positional matching of declarations."""
        def stream(first: str, second: str, printed: str) -> InstructionStream:
            body = (VarDecl(first, IntLit(1)), VarDecl(second, IntLit(2)), Print(Var(printed)))
            return InstructionStream.of(list(zip(("A", "B", "C"), body, strict=True)))

        self.assertTrue(same_modulo_labels(stream("a", "b", "a"), stream("c", "d", "c")))
        self.assertFalse(same_modulo_labels(stream("a", "b", "a"), stream("c", "d", "d")))

    def test_renaming_cannot_capture(self) -> None:
        """A declared name cannot be matched onto a name the stream already uses for something else."""
        left = InstructionStream.of([("A", VarDecl("x", IntLit(1))), ("B", Print(Var("y")))])
        right = InstructionStream.of([("A", VarDecl("y", IntLit(1))), ("B", Print(Var("y")))])
        self.assertFalse(same_modulo_labels(left, right))

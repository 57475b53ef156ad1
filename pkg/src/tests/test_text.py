import tempfile
from pathlib import Path
from unittest import TestCase

from hypothesis import given, settings
from hypothesis import strategies as st

from sourir.errors import NestedExpressionError, ParseError
from sourir.fixtures import fixture_names, fixture_text, load_fixture
from sourir.fuzz import GenConfig, gen_program
from sourir.ir import FALSE, NIL, ArrayRead, FunRef, IntLit, Length, Op, Primop, Stop, Var
from sourir.text import (
    SourceFile,
    parse,
    parse_expression,
    parse_inputs,
    read_inputs,
    render_expr,
    render_instruction,
    render_program,
)


class ParseTestCase(TestCase):
    """Parsing of programs, expressions and input scripts."""

    def test_synthesized_labels(self) -> None:
        """Unlabeled instructions get `_<position>` labels."""
        program = parse("func main()\nversion V0\n  print 1\n  L1: stop\n")
        self.assertEqual(program.stream("main", "V0").labels, ("_0", "L1"))

    def test_comments_and_blank_lines(self) -> None:
        """Comments and blank lines are ignored."""
        program = parse("# header\n\nfunc main()\nversion V0\n\n  stop  # done\n")
        self.assertEqual(program.stream("main", "V0").lookup("_0"), Stop())

    def test_error_position(self) -> None:
        """Parse errors report the line and column of the offending token."""
        with self.assertRaises(ParseError) as ctx:
            parse("func main()\nversion V0\n  print 1\n  frobnicate x\n  stop\n")
        self.assertEqual(ctx.exception.line, 4)
        self.assertEqual(ctx.exception.column, 3)

    def test_nested_expression(self) -> None:
        """Operands of an operation must be simple."""
        with self.assertRaises(NestedExpressionError):
            parse("func main()\nversion V0\n  print 1 + 2 + 3\n  stop\n")

    def test_duplicate_version(self) -> None:
        """A version label appears once per function."""
        with self.assertRaises(ParseError):
            parse("func main()\nversion V0\n  stop\nversion V0\n  stop\n")

    def test_duplicate_function(self) -> None:
        """A function name appears once per program."""
        with self.assertRaises(ParseError):
            parse("func main()\nversion V0\n  stop\nfunc main()\nversion V1\n  stop\n")

    def test_literal_range(self) -> None:
        """Integer literals outside 64 bits are parse errors."""
        with self.assertRaises(ParseError):
            parse_expression(str(2**63))

    def test_expressions(self) -> None:
        """Each expression form parses to its node."""
        self.assertEqual(parse_expression("-1"), IntLit(-1))
        self.assertEqual(parse_expression("- 1"), Primop(Op.NEG, (IntLit(1),)))
        self.assertEqual(parse_expression("x - -1"), Primop(Op.SUB, (Var("x"), IntLit(-1))))
        self.assertEqual(parse_expression("a[0]"), ArrayRead(Var("a"), IntLit(0)))
        self.assertEqual(parse_expression("length(a)"), Length(Var("a")))
        self.assertEqual(parse_expression("&size"), FunRef("size"))
        self.assertEqual(parse_expression("!b"), Primop(Op.NOT, (Var("b"),)))

    def test_inputs(self) -> None:
        """Input scripts are literals separated by commas or newlines."""
        self.assertEqual(parse_inputs("1, -2\nnil,false"), [IntLit(1), IntLit(-2), NIL, FALSE])
        self.assertEqual(parse_inputs(""), [])


class PrintTestCase(TestCase):
    """Canonical printing."""

    def test_fixtures_round_trip(self) -> None:
        """Printing then parsing every bundled program gives the same program."""
        for name in fixture_names():
            with self.subTest(fixture=name):
                program = load_fixture(name)
                self.assertEqual(parse(render_program(program)), program)

    def test_extra_frames(self) -> None:
        """Extra frames follow the target, each with its return variable."""
        assume = load_fixture("fig8").stream("main", "Vinl").lookup("_4")
        self.assertEqual(
            render_instruction(assume),
            "assume x != nil else size.Vb.L2 [el = 32, x = x], main.Vb.Lret ret s [pl = pl, vec = vec]",
        )

    def test_empty_predicates(self) -> None:
        """An assume without predicates prints with nothing before `else`."""
        program = parse("func main()\nversion V0\n  L0: assume else main.V0.L1 []\n  L1: stop\n")
        self.assertEqual(render_instruction(program.stream("main", "V0").lookup("L0")), "assume else main.V0.L1 []")

    def test_negation_of_literal(self) -> None:
        """Negating a literal keeps a space so it does not read back as a negative literal."""
        expr = Primop(Op.NEG, (IntLit(5),))
        self.assertEqual(render_expr(expr), "- 5")
        self.assertEqual(parse_expression(render_expr(expr)), expr)

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32))
    def test_generated_round_trip(self, seed: int) -> None:
        """Printing then parsing a generated program gives the same program."""
        program = gen_program(GenConfig(seed=seed))
        self.assertEqual(parse(render_program(program)), program)


class SourceFileTestCase(TestCase):
    """Reading and writing source files."""

    def test_read_and_write(self) -> None:
        """A source file written to disk reads back as the same program."""
        program = load_fixture("fig8")
        with tempfile.TemporaryDirectory() as directory:
            path = SourceFile(program).to_file(Path(directory) / "out.sourir")
            self.assertEqual(SourceFile.read(path).program, program)

    def test_from_text(self) -> None:
        """Source text is parsed on construction."""
        source = SourceFile.from_text(fixture_text("fig2.sourir"))
        self.assertEqual(source.program, load_fixture("fig2"))
        self.assertIsNone(source.path)

    def test_read_inputs(self) -> None:
        """Input files use the inline script format."""
        with tempfile.TemporaryDirectory() as directory:
            path = Path(directory) / "inputs.txt"
            path.write_text("3\n4, nil\n", encoding="utf-8")
            self.assertEqual(read_inputs(path), [IntLit(3), IntLit(4), NIL])

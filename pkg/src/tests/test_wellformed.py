from unittest import TestCase

from hypothesis import given, settings
from hypothesis import strategies as st

from sourir.analysis import DiagnosticCode, check_program, render_diagnostics, scope_at
from sourir.errors import ScopeMismatchError
from sourir.fixtures import fixture_names, load_fixture
from sourir.fuzz import GenConfig, gen_program
from sourir.text import parse


def _codes(text: str) -> list[DiagnosticCode]:
    return [diagnostic.code for diagnostic in check_program(parse(text))]


class CheckProgramTestCase(TestCase):
    """Well-formedness diagnostics."""

    def test_fixtures_are_well_formed(self) -> None:
        """Every bundled program passes the checker."""
        for name in fixture_names():
            with self.subTest(fixture=name):
                self.assertEqual(check_program(load_fixture(name)), [])

    def test_missing_main(self) -> None:
        """A program needs a `main` function."""
        self.assertEqual(_codes("func f()\nversion V0\n  return 1\n"), [DiagnosticCode.MISSING_MAIN])

    def test_main_has_params(self) -> None:
        """A `main` taking parameters has its own diagnostic."""
        program = parse("func main(a)\nversion V0\n  stop\n")
        [diagnostic] = check_program(program)
        self.assertIs(diagnostic.code, DiagnosticCode.MAIN_HAS_PARAMS)
        self.assertIn("MainHasParams", render_diagnostics([diagnostic]))

    def test_main_missing_stop(self) -> None:
        """Every version of `main` ends with `stop`."""
        codes = _codes("func main()\nversion V0\n  L0: goto L1\n  L1: goto L0\n")
        self.assertEqual(codes, [DiagnosticCode.MAIN_MISSING_STOP])

    def test_duplicate_declaration(self) -> None:
        """A variable is declared once per stream."""
        codes = _codes("func main()\nversion V0\n  var x = 1\n  drop x\n  var x = 2\n  stop\n")
        self.assertEqual(codes, [DiagnosticCode.DUPLICATE_DECL])

    def test_unbound_variable(self) -> None:
        """Instructions only use variables in scope."""
        codes = _codes("func main()\nversion V0\n  print y\n  stop\n")
        self.assertEqual(codes, [DiagnosticCode.UNBOUND_VARIABLE])

    def test_unknown_function_and_label(self) -> None:
        """Calls and jumps name existing functions and labels."""
        codes = _codes("func main()\nversion V0\n  call r = &g()\n  goto L9\n  stop\n")
        self.assertEqual(codes, [DiagnosticCode.UNKNOWN_FUNCTION, DiagnosticCode.UNKNOWN_LABEL])

    def test_fall_through_end(self) -> None:
        """The last instruction of a function version cannot fall through."""
        text = "func main()\nversion V0\n  call r = &f()\n  stop\n\nfunc f()\nversion V0\n  print 1\n"
        self.assertEqual(_codes(text), [DiagnosticCode.FALL_THROUGH_END])

    def test_scope_mismatch(self) -> None:
        """Paths joining at a label declare the same variables."""
        text = (
            "func main()\nversion V0\n  var c = true\n  branch c L1 L2\n"
            "  L1: var x = 1\n  goto L2\n  L2: stop\n"
        )
        self.assertEqual(_codes(text), [DiagnosticCode.SCOPE_MISMATCH])

    def test_bad_deopt_target(self) -> None:
        """Deoptimization targets exist."""
        text = "func main()\nversion V0\n  assume true else main.V1.L0 []\n  stop\n"
        self.assertEqual(_codes(text), [DiagnosticCode.BAD_DEOPT_TARGET])

    def test_varmap_scope_mismatch(self) -> None:
        """A varmap installs exactly the scope of its target label."""
        text = (
            "func main()\nversion V1\n  var y = 1\n  assume true else main.V0.L1 [y = y]\n  stop\n"
            "version V0\n  L0: var x = 1\n  L1: print x\n  stop\n"
        )
        self.assertEqual(_codes(text), [DiagnosticCode.VARMAP_SCOPE_MISMATCH])

    def test_render(self) -> None:
        """Diagnostics render as `file:F.V.L: CODE: message`."""
        diagnostics = check_program(parse("func main()\nversion V0\n  print y\n  stop\n"))
        self.assertEqual(
            render_diagnostics(diagnostics, "bad.sourir"),
            "bad.sourir:main.V0._0: UnboundVariable: variables ['y'] are not in scope\n",
        )


class ScopeTestCase(TestCase):
    """Static scope analysis."""

    def test_scope_of_branch_arm(self) -> None:
        """The scope at a label holds parameters and the declarations before it."""
        scopes = scope_at(load_fixture("fig5_base"), "size", "Vb")
        self.assertEqual(scopes["L1"], frozenset({"x"}))
        self.assertEqual(scopes["L3"], frozenset({"x", "el"}))
        self.assertEqual(scopes["L4"], frozenset({"x", "el"}))

    def test_drop_leaves_scope(self) -> None:
        """Dropped variables are out of scope afterwards."""
        scopes = scope_at(load_fixture("hoist_loop"), "count", "Vbase")
        self.assertEqual(scopes["L6"], frozenset({"n", "i"}))
        self.assertEqual(scopes["L7"], frozenset({"n"}))

    def test_deopt_entry_seeds_scope(self) -> None:
        """Labels only entered by deoptimization take the scope the metadata installs."""
        program = parse(
            "func main()\nversion V1\n  var y = 1\n  assume true else main.V0.L1 [y = y]\n  stop\n"
            "version V0\n  L0: stop\n  L1: print y\n  stop\n",
        )
        self.assertEqual(check_program(program), [])
        self.assertEqual(scope_at(program, "main", "V0")["L1"], frozenset({"y"}))

    def test_mismatch_raises(self) -> None:
        """Scope computation refuses joins with different declarations."""
        program = parse(
            "func main()\nversion V0\n  var c = true\n  branch c L1 L2\n  L1: var x = 1\n  goto L2\n  L2: stop\n",
        )
        with self.assertRaises(ScopeMismatchError):
            scope_at(program, "main", "V0")

    def test_worklist_order_on_fixtures(self) -> None:
        """Depth-first and breadth-first traversal find the same scopes in every bundled program."""
        for name in fixture_names():
            program = load_fixture(name)
            for function in program:
                for version in function.version_labels:
                    with self.subTest(fixture=name, function=function.name, version=version):
                        self.assertEqual(
                            dict(scope_at(program, function.name, version)),
                            dict(scope_at(program, function.name, version, depth_first=True)),
                        )

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(min_value=0, max_value=2**32))
    def test_worklist_order_on_generated(self, seed: int) -> None:
        """Depth-first and breadth-first traversal agree on generated programs."""
        program = gen_program(GenConfig(seed=seed))
        for function in program:
            for version in function.version_labels:
                self.assertEqual(
                    dict(scope_at(program, function.name, version)),
                    dict(scope_at(program, function.name, version, depth_first=True)),
                )

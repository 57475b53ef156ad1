from unittest import TestCase

from hypothesis import given, settings
from hypothesis import strategies as st

from sourir.equivalence import (
    EnumeratedPlan,
    ExplicitPlan,
    Verdict,
    check_transparency,
    diff_programs,
    diff_versions,
    driver_harness,
    exhaustive_diff,
    render_diff,
    render_exhaustive,
    render_sweep,
    sweep_transparency,
    version_pair,
)
from sourir.fixtures import load_fixture
from sourir.interp import ForcePolicy
from sourir.ir import NIL, IntLit
from sourir.text import parse, render_instruction

_LOOP = "func main()\nversion V0\n  L0: print 1\n  goto L0\n  stop\n"


def _main(*lines: str) -> str:
    return "func main()\nversion V0\n" + "".join(f"  {line}\n" for line in lines)


class CompareRunsTestCase(TestCase):
    """Verdicts of comparing two runs."""

    def test_equal(self) -> None:
        """Identical traces with the same outcome are equal."""
        result = diff_programs(load_fixture("fig8"), load_fixture("fig8_base"))
        self.assertIs(result.verdict, Verdict.EQUAL)
        self.assertTrue(result.passed)
        self.assertEqual(result.summary(), "EQUAL")

    def test_diverged(self) -> None:
        """The first differing action is reported with its position."""
        result = diff_programs(parse(_main("print 1", "print 2", "stop")), parse(_main("print 1", "print 3", "stop")))
        self.assertIs(result.verdict, Verdict.DIVERGED)
        self.assertFalse(result.passed)
        self.assertEqual(result.summary(), "DIVERGED at 1: left=print 2 right=print 3")

    def test_shorter_trace(self) -> None:
        """A trace ending early diverges against the missing action."""
        result = diff_programs(parse(_main("print 1", "stop")), parse(_main("print 1", "print 1 / 0", "stop")))
        self.assertEqual(result.summary(), "DIVERGED at 1: left=stop right=<end>")

    def test_outcome_mismatch(self) -> None:
        """Equal traces ending in different error kinds do not match."""
        result = diff_programs(parse(_main("print 1 / 0", "stop")), parse(_main("print 1 + true", "stop")))
        self.assertIs(result.verdict, Verdict.OUTCOME_MISMATCH)
        self.assertEqual(
            result.summary(),
            "OUTCOME left=error:DivisionByZero@main.V0._0 right=error:TypeError@main.V0._0",
        )

    def test_error_locations_ignored(self) -> None:
        """Errors of the same kind at different locations match."""
        result = diff_programs(load_fixture("fig5_base"), load_fixture("fig5_vo"), [IntLit(0)])
        self.assertIs(result.verdict, Verdict.EQUAL)
        self.assertNotEqual(result.left.outcome.location, result.right.outcome.location)

    def test_both_out_of_fuel(self) -> None:
        """Two runs cut short by fuel prove nothing."""
        result = diff_programs(parse(_LOOP), parse(_LOOP), fuel=5)
        self.assertIs(result.verdict, Verdict.INCONCLUSIVE)
        self.assertTrue(result.passed)
        self.assertEqual(result.summary(), "INCONCLUSIVE fuel=5")

    def test_one_out_of_fuel(self) -> None:
        """A run cut short with a matching prefix prove nothing either."""
        finite = parse(_main("print 1", "print 1", "print 1", "stop"))
        result = diff_programs(parse(_LOOP), finite, fuel=5)
        self.assertIs(result.verdict, Verdict.INCONCLUSIVE)

    def test_render(self) -> None:
        """Diff reports show the verdict followed by both runs."""
        result = diff_programs(parse(_main("print 1", "stop")), parse(_main("print 2", "stop")))
        self.assertEqual(
            render_diff(result),
            "DIVERGED at 0: left=print 1 right=print 2\n"
            "== left\nprint 1\nstop\n-- outcome: stopped steps:2\n"
            "== right\nprint 2\nstop\n-- outcome: stopped steps:2\n",
        )


class TransparencyTestCase(TestCase):
    """Forcing deoptimization where an assume could fail."""

    def test_correct_metadata(self) -> None:
        """A version with correct metadata behaves the same when forced out."""
        result = check_transparency(load_fixture("fig4_show"))
        self.assertIs(result.verdict, Verdict.EQUAL)

    def test_wrong_metadata(self) -> None:
        """Metadata that restores the wrong state shows up once its assume is forced."""
        program = load_fixture("fig4_show").with_active_version("show", "Vw")
        self.assertIs(check_transparency(program, policy=ForcePolicy.never()).verdict, Verdict.EQUAL)
        result = check_transparency(program)
        self.assertEqual(result.summary(), "DIVERGED at 0: left=print 7 right=print 42")

    def test_sweep(self) -> None:
        """Sweeps force one site at a time and name the failing one."""
        program = load_fixture("fig4_show").with_active_version("show", "Vw")
        results = sweep_transparency(program)
        self.assertEqual(
            render_sweep(results),
            "show.Vw._0: DIVERGED at 0: left=print 7 right=print 42\nshow.Vo._0: EQUAL\n",
        )
        self.assertEqual(check_transparency(program, sweep=True).verdict, Verdict.DIVERGED)

    def test_sweep_all_passing(self) -> None:
        """A passing sweep reports the verdict of its last site."""
        program = load_fixture("fig13_undo")
        results = sweep_transparency(program, [IntLit(7)])
        self.assertEqual([str(site) for site, _ in results], ["undo.Vs123.L1", "undo.Vs12.L1", "undo.Vs1.L1"])
        self.assertTrue(all(result.passed for _, result in results))
        self.assertEqual(check_transparency(program, [IntLit(7)], sweep=True).summary(), results[-1][1].summary())

    def test_inlined_frames(self) -> None:
        """Deoptimizing out of inlined code restores the caller frame."""
        self.assertIs(check_transparency(load_fixture("fig8")).verdict, Verdict.EQUAL)

    @settings(max_examples=25, deadline=None)
    @given(n=st.integers(min_value=-5, max_value=5))
    def test_chained_versions(self, n: int) -> None:
        """Every chain of deoptimizations lands in the same state as running the base version."""
        program = load_fixture("fig13_undo")
        for policy in (ForcePolicy.always(), ForcePolicy.at_ordinals(0)):
            self.assertIs(check_transparency(program, [IntLit(n)], policy=policy).verdict, Verdict.EQUAL)


class VersionDiffTestCase(TestCase):
    """Comparing versions of one function."""

    def test_harness(self) -> None:
        """The harness reads one argument per parameter, calls the function and prints the result."""
        harness = driver_harness(load_fixture("fig13_undo"), "undo")
        rendered = [render_instruction(instr) for _, instr in harness.stream("main", "Vh")]
        self.assertEqual(
            rendered,
            ["var arg_a = nil", "read arg_a", "call result = &undo(arg_a)", "print result", "stop"],
        )

    def test_version_pair(self) -> None:
        """The two programs differ in the active version only."""
        left, right = version_pair(load_fixture("fig13_undo"), "undo", "Vs12", "Vbase")
        self.assertEqual(left.function("undo").active.label, "Vs12")
        self.assertEqual(right.function("undo").active.label, "Vbase")
        self.assertEqual(set(left.function("undo").version_labels), set(right.function("undo").version_labels))

    def test_chain_against_base(self) -> None:
        """Each speculative version agrees with the base version."""
        program = load_fixture("fig13_undo")
        for version in ("Vs123", "Vs12", "Vs1"):
            for n in (0, 1, 2, 5):
                with self.subTest(version=version, n=n):
                    result = diff_versions(program, "undo", version, "Vbase", [IntLit(n)])
                    self.assertIs(result.verdict, Verdict.EQUAL)

    def test_plain_diff_misses_wrong_metadata(self) -> None:
        """Without forcing, the version with wrong metadata looks equivalent."""
        program = load_fixture("fig4_show")
        for x in (7, 42):
            with self.subTest(x=x):
                self.assertIs(diff_versions(program, "show", "Vo", "Vw", [IntLit(x)]).verdict, Verdict.EQUAL)


class ExhaustiveDiffTestCase(TestCase):
    """Comparisons over finite families of input scripts."""

    def test_enumerated_plan(self) -> None:
        """Enumerated plans produce every script in pool order."""
        plan = EnumeratedPlan((IntLit(0), IntLit(1)), 2)
        self.assertEqual(len(plan), 4)
        self.assertEqual(list(plan.scripts())[:2], [(IntLit(0), IntLit(0)), (IntLit(0), IntLit(1))])
        self.assertEqual(list(EnumeratedPlan((IntLit(0),), 0).scripts()), [()])
        with self.assertRaises(ValueError):
            EnumeratedPlan((IntLit(0),), -1)

    def test_size_specialization(self) -> None:
        """The specialized size agrees with the base one on every vector length."""
        plan = EnumeratedPlan((NIL, IntLit(0), IntLit(1), IntLit(2), IntLit(3)), 1)
        results = exhaustive_diff(load_fixture("fig5_base"), load_fixture("fig5_vo"), plan)
        self.assertEqual(len(results), 5)
        self.assertTrue(all(result.verdict is Verdict.EQUAL for _, result in results))

    def test_division_specializations(self) -> None:
        """Every speculated division agrees with the generic one on small tagged values."""
        base = load_fixture("fig14_base")
        program = load_fixture("fig14_div")
        plan = EnumeratedPlan((IntLit(0), IntLit(1), IntLit(2)), 4)
        for version in ("Vd", "Vc", "Vb"):
            with self.subTest(version=version):
                results = exhaustive_diff(base, program.with_active_version("div", version), plan)
                self.assertEqual(len(results), 81)
                self.assertTrue(all(result.passed for _, result in results))

    def test_counterexample(self) -> None:
        """The search stops at the first counterexample unless asked to collect all."""
        left = parse(_main("var x = nil", "read x", "print x", "stop"))
        right = parse(_main("var x = nil", "read x", "print 1", "stop"))
        plan = ExplicitPlan(((IntLit(1),), (IntLit(2),), (IntLit(3),)))
        results = exhaustive_diff(left, right, plan)
        self.assertEqual(len(results), 2)
        self.assertEqual(
            render_exhaustive(results),
            "[1]: EQUAL\n[2]: DIVERGED at 1: left=print 2 right=print 1\n",
        )
        self.assertEqual(len(exhaustive_diff(left, right, plan, collect_all=True)), 3)

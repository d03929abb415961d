import asyncio
import os
import tempfile
from unittest import TestCase, mock

from dyndist.cli import ResultTable, execute, gather_calls, main, thread_count
from dyndist.const import EXIT_DIVERGENCE, EXIT_INVALID, EXIT_OK, EXIT_UNRESOLVED, FROBENIUS_VERDICTS, MAX_DEVIATION, \
    THREADS_ENV
from dyndist.exceptions import ProblemError
from dyndist.problem import load

SAMPLES = os.path.join(os.path.dirname(__file__), "sample")
RUNNABLE = ("pair", "product", "product-step", "product-ordinary", "derivative", "leibniz", "solve", "regularize",
            "frobenius", "sweep", "sweep-order")


def sample(name: str) -> str:
    return os.path.join(SAMPLES, f"{name}.txt")


class TestResultTable(TestCase):

    def test_csv(self):
        table = ResultTable(("name", "value"))
        table.add("a", 0.1)
        table.add("b, c", 2)
        self.assertEqual('name,value\na,0.10000000000000001\n"b, c",2\n', table.to_csv())

    def test_from_csv(self):
        table = ResultTable(("name", "value"))
        table.add("a", 1.0 / 3.0)
        table.add("b", -2.5e-17)
        self.assertEqual(table, ResultTable.from_csv(table.to_csv()))

    def test_render(self):
        table = ResultTable(("m", "error"))
        table.add(16, 0.5)
        self.assertEqual(" m  error\n16    0.5\n", table.render())

    def test_row_width(self):
        self.assertRaises(ValueError, ResultTable(("a", "b")).add, 1)


class TestThreads(TestCase):

    def test_thread_count(self):
        with mock.patch.dict(os.environ, {THREADS_ENV: "3"}):
            self.assertEqual(3, thread_count())
        with mock.patch.dict(os.environ, {THREADS_ENV: "0"}):
            self.assertEqual(1, thread_count())
        with mock.patch.dict(os.environ, {THREADS_ENV: "many"}):
            self.assertEqual(os.cpu_count() or 1, thread_count())

    def test_gather_calls_keeps_order(self):
        calls = [lambda k=k: k * k for k in range(10)]
        self.assertEqual([k * k for k in range(10)], asyncio.run(gather_calls(calls, threads=3)))


def shape_coefficients(cell: str) -> list[list[float]]:
    return [[float(c) for c in piece.split()] for piece in cell.split("|")]


class TestCommands(TestCase):

    def test_derivative(self):
        table = execute("run", load(sample("derivative")))
        self.assertEqual(("location", "right", "left", "mass", "shape", "shape breakpoints"), table.headers)
        (location, right, left, mass, shape, breakpoints), = table.rows
        self.assertEqual((0.0, 0.0, 0.0), (location, right, left))
        self.assertAlmostEqual(1.0, mass, places=14)
        self.assertEqual([[1.0]], shape_coefficients(shape))
        self.assertEqual("", breakpoints)

    def test_product_ramp(self):
        table = execute("product", load(sample("product")))
        self.assertEqual("pairing gap", table.headers[-1])
        (location, right, left, mass, shape, breakpoints, gap), = table.rows
        self.assertEqual((0.0, 0.0, 0.0), (location, right, left))
        self.assertAlmostEqual(0.5, mass, places=14)
        (constant, slope), = shape_coefficients(shape)
        self.assertAlmostEqual(1.0, constant, places=14)
        self.assertAlmostEqual(2.0, slope, places=14)
        self.assertEqual("", breakpoints)
        self.assertLessEqual(gap, 1e-12)

    def test_product_step(self):
        (_, _, _, mass, shape, breakpoints, gap), = execute("run", load(sample("product-step"))).rows
        self.assertAlmostEqual(0.5, mass, places=14)
        self.assertEqual("0 | 2", shape)
        self.assertEqual("0", breakpoints)
        self.assertLessEqual(gap, 1e-10)

    def test_product_ordinary(self):
        (_, _, _, mass, shape, _, gap), = execute("run", load(sample("product-ordinary"))).rows
        self.assertAlmostEqual(3.0, mass, places=14)
        (constant, slope), = shape_coefficients(shape)
        self.assertAlmostEqual(1.0, constant, places=14)
        self.assertAlmostEqual(2.0, slope, places=14)
        self.assertLessEqual(gap, 1e-10)

    def test_solve(self):
        table = execute("solve", load(sample("solve")))
        self.assertEqual(("phase", "t", "s", "x1"), table.headers)
        self.assertEqual(5 + 9 + 5, len(table.rows))
        self.assertEqual(["smooth"] * 5 + ["jump"] * 9 + ["smooth"] * 5, [row[0] for row in table.rows])

    def test_regularize(self):
        table = execute("regularize", load(sample("regularize")))
        self.assertEqual([16, 32, 64], [row[0] for row in table.rows])
        errors = [row[-1] for row in table.rows]
        self.assertTrue(errors[0] > errors[1] > errors[2])

    def test_frobenius(self):
        (residual, points, verdict), = execute("frobenius", load(sample("frobenius"))).rows
        self.assertGreaterEqual(residual, 0.5)
        self.assertEqual(125, points)
        self.assertEqual(FROBENIUS_VERDICTS[False], verdict)

    def test_sweep(self):
        rows = execute("sweep-shapes", load(sample("sweep"))).rows
        self.assertEqual(["uniform ramp", "ramp uniform", "uniform uniform", MAX_DEVIATION], [row[0] for row in rows])
        self.assertAlmostEqual(1.0 / 3.0, rows[1][-1], places=6)
        self.assertAlmostEqual(1.0 / 6.0, rows[2][-1], places=6)
        self.assertEqual(("", ""), rows[3][1:3])
        self.assertAlmostEqual(1.0 / 3.0, rows[3][-1], places=6)

    def test_sweep_max_deviation_not_from_first_row(self):
        rows = execute("sweep-shapes", load(sample("sweep-order"))).rows
        self.assertAlmostEqual(3.5, rows[0][2], places=6)
        self.assertAlmostEqual(1.0 / 6.0, rows[1][-1], places=6)
        self.assertAlmostEqual(1.0 / 6.0, rows[2][-1], places=6)
        self.assertEqual(MAX_DEVIATION, rows[3][0])
        self.assertAlmostEqual(1.0 / 3.0, rows[3][-1], places=6)

    def test_unknown(self):
        problem = load(sample("frobenius"))
        self.assertRaises(ProblemError, execute, "integrate", problem)
        self.assertRaises(ProblemError, execute, "pair", problem)


class TestMain(TestCase):

    def setUp(self) -> None:
        self.directory = tempfile.TemporaryDirectory()

    def tearDown(self) -> None:
        self.directory.cleanup()

    def run_to_file(self, name: str, filename: str, *extra: str) -> tuple[int, str]:
        out = os.path.join(self.directory.name, filename)
        code = main(["run", "--problem", sample(name), "--out", out, *extra])
        with open(out, "r", encoding="utf-8", newline="") as f:
            return code, f.read()

    def test_samples_deterministic(self):
        for name in RUNNABLE:
            with self.subTest(sample=name):
                code, first = self.run_to_file(name, f"{name}-1.csv")
                self.assertEqual(EXIT_OK, code)
                _, second = self.run_to_file(name, f"{name}-2.csv")
                self.assertEqual(first, second)
                self.assertNotIn("\r", first)
                table = ResultTable.from_csv(first)
                self.assertGreater(len(table.rows), 0)

    def test_threads_do_not_change_output(self):
        with mock.patch.dict(os.environ, {THREADS_ENV: "1"}):
            _, single = self.run_to_file("sweep", "single.csv")
        with mock.patch.dict(os.environ, {THREADS_ENV: "4"}):
            _, parallel = self.run_to_file("sweep", "parallel.csv")
        self.assertEqual(single, parallel)

    def test_overrides(self):
        _, default = self.run_to_file("solve", "default.csv")
        _, finer = self.run_to_file("solve", "finer.csv", "--steps", "8")
        self.assertEqual(len(default.splitlines()) + 8, len(finer.splitlines()))

    def test_hex_seed(self):
        _, default = self.run_to_file("pair", "default.csv")
        code, bare = self.run_to_file("pair", "bare.csv", "--seed", "5EED")
        self.assertEqual(EXIT_OK, code)
        _, prefixed = self.run_to_file("pair", "prefixed.csv", "--seed", "0x5eed")
        self.assertEqual(default, bare)
        self.assertEqual(default, prefixed)
        _, other = self.run_to_file("pair", "other.csv", "--seed", "1234")
        self.assertNotEqual(default, other)

    def test_exit_codes(self):
        self.assertEqual(EXIT_UNRESOLVED, main(["run", "--problem", sample("unresolved")]))
        self.assertEqual(EXIT_DIVERGENCE, main(["run", "--problem", sample("divergence")]))
        self.assertEqual(EXIT_INVALID, main(["run", "--problem", sample("invalid")]))
        self.assertEqual(EXIT_INVALID, main(["run", "--problem", sample("does-not-exist")]))

    def test_bad_arguments(self):
        with mock.patch("sys.stderr"):
            with self.assertRaises(SystemExit) as context:
                main(["integrate", "--problem", sample("solve")])
        self.assertEqual(2, context.exception.code)

    def test_stdout(self):
        with mock.patch("sys.stdout") as stdout:
            self.assertEqual(EXIT_OK, main(["frobenius", "--problem", sample("frobenius")]))
        written = "".join(call.args[0] for call in stdout.write.call_args_list)
        self.assertIn("max residual", written)

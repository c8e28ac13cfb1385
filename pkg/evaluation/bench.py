"""
Operation-count benchmark: naive evaluation against the grid algorithms.
"""
import logging
import time
from fractions import Fraction

from evaluation import factories
from evaluation.ffield import FieldTower
from evaluation.mme import run_algorithm

logger = logging.getLogger(__name__)

COLUMNS = (
    "algorithm",
    "p",
    "a",
    "n",
    "d",
    "N",
    "preprocessing",
    "local",
    "total",
    "seconds",
)


class BenchReport:
    """
    Rows of one benchmark, reproducible up to the ``seconds`` column.

    Attributes:
        seed (int): Seed of the instance draws.
        rows (list of dict): One row per (algorithm, instance).
    """

    def __init__(self, seed):
        self.seed = seed
        self.rows = []

    def add(self, row):
        self.rows.append(row)

    def select(self, **match):
        return [
            row
            for row in self.rows
            if all(row[key] == value for key, value in match.items())
        ]

    def ratios(self, numerator="naive", denominator="v1"):
        """
        ``total(numerator) / total(denominator)`` per ``(d, N)``, exact.
        """
        out = []
        for row in self.select(algorithm=denominator):
            other = self.select(algorithm=numerator, d=row["d"], N=row["N"])
            if other and row["total"]:
                out.append(
                    (row["d"], row["N"], Fraction(other[0]["total"], row["total"]))
                )
        return out

    def ratios_increasing(self, numerator="naive", denominator="v1"):
        """
        Whether the ratio grows strictly with d; None below two degrees.

        Only the ``N = d^n`` sweep rows have both algorithms, so each d
        contributes one ratio.
        """
        trend = [ratio for _, _, ratio in sorted(self.ratios(numerator, denominator))]
        if len(trend) < 2:
            return None
        return all(x < y for x, y in zip(trend, trend[1:]))

    def preprocessing_independent(self, algorithm="v1"):
        """
        Whether preprocessing is equal across point counts at each d.

        Returns None when no degree was run with more than one N.
        """
        checked = None
        for d in sorted({row["d"] for row in self.select(algorithm=algorithm)}):
            rows = self.select(algorithm=algorithm, d=d)
            if len({row["N"] for row in rows}) < 2:
                continue
            equal = len({row["preprocessing"] for row in rows}) == 1
            checked = equal and checked is not False
        return checked

    def checks(self):
        out = {}
        for name, outcome in (
            ("ratio_increasing", self.ratios_increasing()),
            ("preprocessing_independent_of_N", self.preprocessing_independent()),
        ):
            if outcome is not None:
                out[name] = outcome
        return out

    def lines(self, timings=True):
        columns = COLUMNS if timings else COLUMNS[:-1]
        out = [f"# seed={self.seed}", " ".join(columns)]
        for row in self.rows:
            out.append(" ".join(str(row[column]) for column in columns))
        for d, N, ratio in self.ratios():
            out.append(f"ratio naive/v1 d={d} N={N} {float(ratio):.6f}")
        for name, passed in self.checks().items():
            out.append(f"check {name}=" + ("pass" if passed else "fail"))
        return out


def bench_instance(report, inst, algorithms, threads=None):
    tower, f = inst.tower, inst.f
    for algorithm in algorithms:
        start = time.perf_counter()
        _, run = run_algorithm(inst, algorithm, threads=threads)
        elapsed = time.perf_counter() - start
        report.add(
            {
                "algorithm": algorithm,
                "p": tower.p,
                "a": tower.a,
                "n": f.n,
                "d": f.d,
                "N": len(inst.points),
                "preprocessing": run.preprocessing.total,
                "local": run.local.total,
                "total": run.preprocessing.total + run.local.total,
                "seconds": f"{elapsed:.3f}",
            }
        )
        logger.info(
            f"bench {algorithm} d={f.d} N={len(inst.points)} "
            f"total={run.preprocessing.total + run.local.total}"
        )


def run_bench(
    seed,
    p=2,
    a=2,
    n=2,
    degrees=(4, 8, 16),
    algorithms=("naive", "v1"),
    extra_counts=None,
    threads=None,
):
    """
    Run every algorithm on ``N = d^n`` random points for each d.

    Args:
        seed (int): Seed for polynomials and points.
        p (int): Characteristic.
        a (int): Degree of F_q.
        n (int): Number of variables.
        degrees (tuple): Individual degree bounds to sweep.
        algorithms (tuple): Algorithms to run.
        extra_counts (tuple, optional): Further point counts run with v1
            on the polynomial of the first degree, to show that
            preprocessing ignores N.
        threads (int, optional): Worker count.

    Returns:
        BenchReport: The collected rows.
    """
    factories.reseed(seed)
    tower = FieldTower(p, a)
    report = BenchReport(seed)
    first = None
    for d in degrees:
        inst = factories.MmeInstanceFactory(tower=tower, n=n, d=d, N=d**n)
        if first is None:
            first = inst
        bench_instance(report, inst, algorithms, threads)
    for count in extra_counts or ():
        inst = factories.MmeInstanceFactory(
            tower=tower, f=first.f, n=n, d=degrees[0], N=count
        )
        bench_instance(report, inst, ("v1",), threads)
    return report

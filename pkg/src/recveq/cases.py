"""The bundled corpus and the verdict each pair is expected to get."""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from typing import Optional, Tuple

from .lang import load
from .lang.ast import SourceUnit


@dataclass(frozen=True)
class CorpusCase:
    source: str
    pair: Tuple[str, str]
    verdict: str
    reason: Optional[str] = None
    tag: str = ""

    def expected(self) -> str:
        return f"{self.verdict}({self.reason})" if self.reason else self.verdict


CASES = (
    CorpusCase("sum.mrc", ("sum1", "sum2"), "Equivalent", tag="in-sync sum"),
    CorpusCase("fib.mrc", ("f1", "f2"), "Equivalent", tag="fibonacci, skip-ahead step"),
    CorpusCase("fib.mrc", ("h1", "h2"), "Equivalent", tag="fibonacci, parity-conditioned step"),
    CorpusCase("switch.mrc", ("m1", "m2"), "NotProven", "StepFailed", tag="flag polarity"),
    CorpusCase("redundant.mrc", ("t1", "t2"), "NotProven", "SyncUnrollingNotFound",
               tag="redundant calls"),
    CorpusCase("pascal.mrc", ("p1", "p2"), "Inconclusive", tag="binomial coefficients"),
)


def corpus_text(name: str) -> str:
    return resources.files("recveq").joinpath("corpus", name).read_text()


def corpus_unit(name: str) -> SourceUnit:
    return load(corpus_text(name))


def corpus_files() -> Tuple[str, ...]:
    root = resources.files("recveq").joinpath("corpus")
    return tuple(sorted(p.name for p in root.iterdir() if p.name.endswith(".mrc")))


def matches(case: CorpusCase, verdict) -> bool:
    if type(verdict).__name__ != case.verdict:
        return False
    return case.reason is None or getattr(verdict, "reason", None) == case.reason

"""Lemma-check matrix over a grid of (n, k) pairs.

Deterministic: within the exact oracle's bounds no randomness is drawn,
so repeated invocations are byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Dict, List

from .analysis import EXACT_MAX_K, EXACT_MAX_N, LemmaCheck, TooLarge, check_lemma_bounds


@dataclass(frozen=True)
class LemmaMatrix:
    max_n: int
    max_k: int
    cells: List[Dict[str, object]]
    all_passed: bool

    def to_json(self) -> str:
        return json.dumps({"max_n": self.max_n, "max_k": self.max_k,
                           "all_passed": self.all_passed, "cells": self.cells},
                          indent=2, sort_keys=True)

    def to_table(self) -> str:
        lines = [f"{'n':>3} {'k':>4}  {'lemma':<28} {'method':<11} "
                 f"{'probability':>12} {'bound':>12}  result"]
        for cell in self.cells:
            prob = "-" if cell["probability"] is None else f"{cell['probability']:.6f}"
            bound = "-" if cell["bound"] is None else f"{cell['bound']:.6f}"
            result = {True: "PASS", False: "FAIL", None: "SKIPPED"}[cell["passed"]]
            lines.append(f"{cell['n']:>3} {cell['k']:>4}  {cell['lemma']:<28} "
                         f"{cell['method']:<11} {prob:>12} {bound:>12}  {result}")
        lines.append(f"overall: {'PASS' if self.all_passed else 'FAIL'}")
        return "\n".join(lines)


def _cell(n: int, k: int, check: LemmaCheck) -> Dict[str, object]:
    return {"n": n, "k": k, "lemma": check.lemma, "method": check.method,
            "probability": check.probability, "bound": check.bound,
            "passed": check.passed, "detail": check.detail}


def lemma_report(max_n: int, max_k: int) -> LemmaMatrix:
    """Evaluate every applicable lemma regime for 2 <= n <= max_n, 2 <= k <= max_k."""
    if max_n < 2 or max_k < 2:
        raise ValueError("need max_n >= 2 and max_k >= 2")
    if max_n > EXACT_MAX_N or max_k > EXACT_MAX_K:
        raise TooLarge(f"matrix limited to the exact oracle: "
                       f"max_n <= {EXACT_MAX_N}, max_k <= {EXACT_MAX_K}")
    cells: List[Dict[str, object]] = []
    all_passed = True
    for n in range(2, max_n + 1):
        for k in range(2, max_k + 1):
            for check in check_lemma_bounds(n, k):
                if not check.applicable:
                    continue
                cells.append(_cell(n, k, check))
                if check.passed is False:
                    all_passed = False
    return LemmaMatrix(max_n=max_n, max_k=max_k, cells=cells, all_passed=all_passed)

"""Exhaustive-enumeration engine: exact approximation-set cardinalities,
partition functions, two-sample intersections, and Boltzmann averages.

Assignments are encoded as mixed-radix integers with object 0 as the least
significant digit (labels 1..k map to digits 0..k-1), so a serialized table
is portable across runs. Everything here is deliberately simple and
vectorized; it serves as the trusted oracle for the sampling machinery.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .core import Correspondence
from .costs import CostFunction, DEFAULT_BUDGET
from .errors import BudgetError

__all__ = [
    "CostTable",
    "GAMMA_SLACK",
    "decode_indices",
    "encode_labels",
    "enumerate_costs",
    "approx_set_size",
    "exact_log_partition",
    "log_partition_of_costs",
    "exact_mean_cost",
    "joint_cost_table",
    "exact_joint_log_partition",
    "exact_set_intersection",
    "save_table",
    "load_table",
]

GAMMA_SLACK = 1e-12  # absolute float slack on the approximation threshold
_BLOCK = 1 << 15
_MAGIC = b"ASCT\x01"


def decode_indices(indices: np.ndarray, n: int, k: int) -> np.ndarray:
    """Indices -> m x n label matrix (labels 1..k)."""
    radix = k ** np.arange(n, dtype=np.int64)
    return (np.asarray(indices, dtype=np.int64)[:, None] // radix[None, :]) % k + 1


def encode_labels(labels: np.ndarray, k: int) -> np.ndarray:
    """m x n label matrix -> indices."""
    labels = np.asarray(labels, dtype=np.int64)
    radix = k ** np.arange(labels.shape[-1], dtype=np.int64)
    return (labels - 1) @ radix


@dataclass(frozen=True)
class CostTable:
    """All k^n costs of one cost function, in encoding order."""

    costs: np.ndarray
    n: int
    k: int
    tag: str
    r_min: float
    argmin_index: int

    @staticmethod
    def from_costs(costs: np.ndarray, n: int, k: int, tag: str) -> "CostTable":
        costs = np.ascontiguousarray(costs, dtype=np.float64)
        if costs.size != k**n:
            raise ValueError(f"table length {costs.size} != k^n = {k**n}")
        costs.flags.writeable = False
        arg = int(np.argmin(costs))  # lowest index among exact ties
        return CostTable(costs=costs, n=n, k=k, tag=tag,
                         r_min=float(costs[arg]), argmin_index=arg)

    def minimizer_labels(self) -> np.ndarray:
        return decode_indices(np.array([self.argmin_index]), self.n, self.k)[0]


def _check_budget(n: int, k: int, budget: int) -> int:
    size = k**n
    if size > budget:
        raise BudgetError(f"k^n = {size} exceeds enumeration budget {budget}")
    return size


def enumerate_costs(cost: CostFunction, budget: int = DEFAULT_BUDGET) -> CostTable:
    """Materialize the full cost table of a hypothesis class."""
    size = _check_budget(cost.n, cost.k, budget)
    out = np.empty(size, dtype=np.float64)
    for start in range(0, size, _BLOCK):
        idx = np.arange(start, min(start + _BLOCK, size), dtype=np.int64)
        out[start : start + idx.size] = cost.evaluate_batch(
            decode_indices(idx, cost.n, cost.k)
        )
    return CostTable.from_costs(out, cost.n, cost.k, cost.name)


def approx_set_size(table: CostTable, gamma: float) -> int:
    """|{c : R(c) <= r_min + gamma}| with a small absolute slack on the
    threshold so boundary members are not lost to summation noise."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    return int((table.costs <= table.r_min + gamma + GAMMA_SLACK).sum())


def log_partition_of_costs(costs: np.ndarray, r_min: float, beta: float) -> float:
    """Stable log sum exp(-beta * costs) given the minimum cost."""
    shifted = -beta * (costs - r_min)
    return float(-beta * r_min + np.log(np.exp(shifted).sum()))


def exact_log_partition(table: CostTable, beta: float) -> float:
    """log sum_c exp(-beta R(c)), max-subtracted; exactly n log k at beta=0."""
    if beta < 0 or not np.isfinite(beta):
        raise ValueError("beta must be finite and >= 0")
    if beta == 0.0:
        return table.n * float(np.log(table.k))
    return log_partition_of_costs(table.costs, table.r_min, beta)


def exact_mean_cost(table: CostTable, beta: float) -> float:
    """Boltzmann average of the cost at inverse temperature beta."""
    if beta < 0 or not np.isfinite(beta):
        raise ValueError("beta must be finite and >= 0")
    w = np.exp(-beta * (table.costs - table.r_min))
    return float((table.costs @ w) / w.sum())


def _pushforward_indices(indices: np.ndarray, corr: Correspondence, n: int, k: int) -> np.ndarray:
    labels = decode_indices(indices, n, k)
    return encode_labels(labels[:, corr.nu], k)


def joint_cost_table(
    table1: CostTable,
    cost2: CostFunction,
    corr: Correspondence,
    budget: int = DEFAULT_BUDGET,
) -> np.ndarray:
    """Combined costs R(c, X1) + R(pushforward(c), X2) over all training
    assignments c, in table1's encoding order."""
    if cost2.n != table1.n or cost2.k != table1.k:
        raise ValueError("cost2 must share n and k with table1")
    size = _check_budget(table1.n, table1.k, budget)
    table2 = enumerate_costs(cost2, budget=budget)
    out = np.empty(size, dtype=np.float64)
    for start in range(0, size, _BLOCK):
        idx = np.arange(start, min(start + _BLOCK, size), dtype=np.int64)
        pushed = _pushforward_indices(idx, corr, table1.n, table1.k)
        out[start : start + idx.size] = table1.costs[idx] + table2.costs[pushed]
    return out


def exact_joint_log_partition(
    table1: CostTable,
    cost2: CostFunction,
    corr: Correspondence,
    beta: float,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """log sum_c exp(-beta R(c, X1)) exp(-beta R(pushforward(c), X2)).

    The sum runs over training assignments; when the correspondence is a
    bijection this coincides with summing over test assignments.
    """
    if beta < 0 or not np.isfinite(beta):
        raise ValueError("beta must be finite and >= 0")
    if beta == 0.0:
        return table1.n * float(np.log(table1.k))
    combined = joint_cost_table(table1, cost2, corr, budget=budget)
    return log_partition_of_costs(combined, float(combined.min()), beta)


def exact_set_intersection(
    table1: CostTable,
    table2: CostTable,
    corr: Correspondence,
    gamma: float,
) -> int:
    """#{c in C_gamma(X1) : pushforward(c) in C_gamma(X2)}, counted over
    training assignments (pushforward collisions are not collapsed)."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if table2.n != table1.n or table2.k != table1.k:
        raise ValueError("tables must share n and k")
    thresh1 = table1.r_min + gamma + GAMMA_SLACK
    mask2 = table2.costs <= table2.r_min + gamma + GAMMA_SLACK
    count = 0
    size = table1.costs.size
    for start in range(0, size, _BLOCK):
        idx = np.arange(start, min(start + _BLOCK, size), dtype=np.int64)
        sel = idx[table1.costs[idx] <= thresh1]
        if sel.size:
            pushed = _pushforward_indices(sel, corr, table1.n, table1.k)
            count += int(mask2[pushed].sum())
    return count


def save_table(table: CostTable, path: str) -> None:
    """Binary dump: magic, n, k, tag, then little-endian float64 costs."""
    tag = table.tag.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IIH", table.n, table.k, len(tag)))
        fh.write(tag)
        fh.write(table.costs.astype("<f8").tobytes())


def load_table(path: str) -> CostTable:
    with open(path, "rb") as fh:
        if fh.read(len(_MAGIC)) != _MAGIC:
            raise ValueError(f"{path}: not a cost-table dump")
        n, k, taglen = struct.unpack("<IIH", fh.read(10))
        tag = fh.read(taglen).decode("utf-8")
        costs = np.frombuffer(fh.read(), dtype="<f8").astype(np.float64)
    return CostTable.from_costs(costs, n, k, tag)

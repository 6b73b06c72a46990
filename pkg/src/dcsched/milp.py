"""Thin mixed-integer linear programming layer over scipy's HiGHS backend.

Models are built incrementally (variables, linear constraints, one linear
objective) and handed to :func:`solve`. Keeping the model data separate from
the backend lets tests substitute exhaustive oracles for the same model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint
from scipy.optimize import milp as _scipy_milp

INT_TOL = 1e-6

SENSES = ("<=", "=", ">=")


@dataclass
class _Variable:
    name: str
    kind: str  # "integer" | "continuous"
    lb: float
    ub: float


@dataclass
class _Constraint:
    coeffs: dict[int, float]
    sense: str
    rhs: float
    name: str


@dataclass
class MilpModel:
    """A linear model with integer/continuous variables, maximized by default."""

    variables: list[_Variable] = field(default_factory=list)
    constraints: list[_Constraint] = field(default_factory=list)
    objective: dict[int, float] = field(default_factory=dict)
    objective_constant: float = 0.0
    maximize: bool = True

    def add_var(self, name: str, kind: str = "integer",
                lb: float = 0.0, ub: float | None = None) -> int:
        if kind not in ("integer", "continuous"):
            raise ValueError(f"unknown variable kind {kind!r}")
        hi = np.inf if ub is None else float(ub)
        if lb > hi:
            raise ValueError(f"variable {name}: lb {lb} > ub {hi}")
        self.variables.append(_Variable(name, kind, float(lb), hi))
        return len(self.variables) - 1

    def add_constraint(self, coeffs: Mapping[int, float], sense: str,
                       rhs: float, name: str = "") -> None:
        if sense not in SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        for vid in coeffs:
            if not (0 <= vid < len(self.variables)):
                raise ValueError(f"constraint {name!r} references unknown variable {vid}")
        self.constraints.append(_Constraint(dict(coeffs), sense, float(rhs), name))

    def set_objective(self, coeffs: Mapping[int, float], constant: float = 0.0,
                      maximize: bool = True) -> None:
        for vid in coeffs:
            if not (0 <= vid < len(self.variables)):
                raise ValueError(f"objective references unknown variable {vid}")
        self.objective = dict(coeffs)
        self.objective_constant = float(constant)
        self.maximize = maximize


@dataclass
class SolveResult:
    status: str  # "optimal" | "feasible-gap" | "infeasible" | "error"
    values: np.ndarray | None
    objective: float | None
    gap: float
    message: str = ""

    def value(self, vid: int) -> float:
        assert self.values is not None
        return float(self.values[vid])


def solve(model: MilpModel, gap_tol: float = 1e-4,
          time_limit: float = 60.0) -> SolveResult:
    """Solve `model` with HiGHS branch-and-bound.

    Integer variables in the returned values are rounded; a residual above
    INT_TOL after rounding is reported as an error.
    """
    n = len(model.variables)
    c = np.zeros(n)
    for vid, coef in model.objective.items():
        c[vid] = coef
    sign = -1.0 if model.maximize else 1.0

    integrality = np.array(
        [1 if v.kind == "integer" else 0 for v in model.variables]
    )
    bounds = Bounds(
        np.array([v.lb for v in model.variables]),
        np.array([v.ub for v in model.variables]),
    )

    constraints = []
    if model.constraints:
        rows, cols, data = [], [], []
        lo = np.empty(len(model.constraints))
        hi = np.empty(len(model.constraints))
        for i, con in enumerate(model.constraints):
            for vid, coef in con.coeffs.items():
                rows.append(i)
                cols.append(vid)
                data.append(coef)
            if con.sense == "<=":
                lo[i], hi[i] = -np.inf, con.rhs
            elif con.sense == ">=":
                lo[i], hi[i] = con.rhs, np.inf
            else:
                lo[i] = hi[i] = con.rhs
        a = sparse.csr_matrix((data, (rows, cols)), shape=(len(model.constraints), n))
        constraints.append(LinearConstraint(a, lo, hi))

    options = {"mip_rel_gap": gap_tol, "time_limit": time_limit, "disp": False}
    try:
        res = _scipy_milp(
            c=sign * c,
            constraints=constraints,
            integrality=integrality,
            bounds=bounds,
            options=options,
        )
        if res.status == 2:
            # the HiGHS build shipped with scipy 1.15 can mis-declare a
            # feasible integer model infeasible during presolve; only
            # trust the verdict if it survives with presolve disabled
            res = _scipy_milp(
                c=sign * c,
                constraints=constraints,
                integrality=integrality,
                bounds=bounds,
                options={**options, "presolve": False},
            )
    except Exception as exc:  # backend failure
        return SolveResult("error", None, None, np.inf, f"backend failure: {exc}")

    gap = float(getattr(res, "mip_gap", 0.0) or 0.0)
    if res.status == 2:
        return SolveResult("infeasible", None, None, np.inf, res.message)
    if res.x is None:
        return SolveResult("error", None, None, np.inf, res.message)

    values = np.asarray(res.x, dtype=float).copy()
    for vid, var in enumerate(model.variables):
        if var.kind == "integer":
            rounded = round(values[vid])
            if abs(values[vid] - rounded) > 1e-4:
                return SolveResult(
                    "error", None, None, np.inf,
                    f"integer variable {var.name} at {values[vid]} is not integral",
                )
            values[vid] = rounded
    objective = float(c @ values + model.objective_constant)

    if res.status == 0:
        return SolveResult("optimal", values, objective, gap, res.message)
    return SolveResult("feasible-gap", values, objective, gap, res.message)


def check_feasible(model: MilpModel, values: np.ndarray, tol: float = 1e-6) -> list[str]:
    """Return descriptions of constraints/bounds violated by more than tol."""
    bad = []
    for vid, var in enumerate(model.variables):
        x = values[vid]
        if x < var.lb - tol or x > var.ub + tol:
            bad.append(f"variable {var.name} = {x} outside [{var.lb}, {var.ub}]")
    for con in model.constraints:
        lhs = sum(coef * values[vid] for vid, coef in con.coeffs.items())
        if con.sense == "<=" and lhs > con.rhs + tol:
            bad.append(f"{con.name or '<='}: {lhs} > {con.rhs}")
        elif con.sense == ">=" and lhs < con.rhs - tol:
            bad.append(f"{con.name or '>='}: {lhs} < {con.rhs}")
        elif con.sense == "=" and abs(lhs - con.rhs) > tol:
            bad.append(f"{con.name or '='}: {lhs} != {con.rhs}")
    return bad


def write_lp(model: MilpModel, path: str) -> None:
    """Dump the model in LP text format for debugging."""
    def term(coef: float, name: str) -> str:
        return f"{'+' if coef >= 0 else '-'} {abs(coef):g} {name} "

    lines = ["Maximize" if model.maximize else "Minimize", " obj: "]
    for vid, coef in sorted(model.objective.items()):
        lines[-1] += term(coef, model.variables[vid].name)
    lines.append("Subject To")
    for i, con in enumerate(model.constraints):
        expr = "".join(
            term(coef, model.variables[vid].name)
            for vid, coef in sorted(con.coeffs.items())
        )
        op = {"<=": "<=", ">=": ">=", "=": "="}[con.sense]
        lines.append(f" {con.name or f'c{i}'}: {expr}{op} {con.rhs:g}")
    lines.append("Bounds")
    for var in model.variables:
        ub = "+inf" if np.isinf(var.ub) else f"{var.ub:g}"
        lines.append(f" {var.lb:g} <= {var.name} <= {ub}")
    generals = [v.name for v in model.variables if v.kind == "integer"]
    if generals:
        lines.append("General")
        lines.append(" " + " ".join(generals))
    lines.append("End")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")

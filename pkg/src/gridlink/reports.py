"""Document rendering and parsing for CLI outputs.

Two views exist for most reports: a human table rounded to 4 significant
digits and a structured JSON document carrying full round-trip double
precision.  Every document starts with a provenance header (tool version,
configuration echo, case checksum) and is byte-deterministic for identical
inputs.
"""

from __future__ import annotations

import json
from typing import Any

import numpy as np

from gridlink.dynamics import Trajectory
from gridlink.linearization import SpectrumReport
from gridlink.planner import PlanResult
from gridlink.reduction import OperatingPoint, ReducedNetwork


def sig4(value: float) -> str:
    return f"{value:.4g}"


def _complex_matrix(m: np.ndarray) -> list[list[list[float]]]:
    return [[[float(v.real), float(v.imag)] for v in row] for row in m]


def _real_matrix(m: np.ndarray) -> list[list[float]]:
    return [[float(v) for v in row] for row in m]


def header_lines(meta: dict[str, Any]) -> list[str]:
    return [f"# {key}: {value}" for key, value in meta.items()]


def render_json(doc: dict[str, Any]) -> str:
    return json.dumps(doc, indent=2) + "\n"


# --- spectrum ---------------------------------------------------------------


def spectrum_document(report: SpectrumReport, meta: dict[str, Any]) -> dict[str, Any]:
    return {
        "meta": meta,
        "alpha_max": report.alpha_max,
        "deflated": report.deflated,
        "deflated_magnitude": report.deflated_magnitude,
        "eigenvalues": [[float(v.real), float(v.imag)] for v in report.eigenvalues],
    }


def spectrum_table(report: SpectrumReport, meta: dict[str, Any]) -> str:
    lines = header_lines(meta)
    lines.append(f"alpha_max: {sig4(report.alpha_max)}")
    if report.deflated:
        lines.append(f"deflated_zero_mode: true (|lambda| = {sig4(report.deflated_magnitude)})")
    else:
        lines.append("deflated_zero_mode: false")
    lines.append("eigenvalue_re,eigenvalue_im")
    for v in report.eigenvalues:
        lines.append(f"{sig4(v.real)},{sig4(v.imag)}")
    return "\n".join(lines) + "\n"


# --- plan -------------------------------------------------------------------


def _plan_rows(result: PlanResult) -> list[tuple]:
    # Link endpoints are reported 1-based, matching generator numbering in
    # the human tables; row 0 is the uncontrolled baseline.
    rows: list[tuple] = [(0, "", "", result.baseline_alpha, 0.0)]
    for it in result.iterations:
        rows.append((it.index, it.link[0] + 1, it.link[1] + 1, it.alpha_max_after, it.marginal_gain))
    return rows


def plan_meta(result: PlanResult, meta: dict[str, Any]) -> dict[str, Any]:
    out = dict(meta)
    out["baseline_alpha"] = repr(result.baseline_alpha)
    out["final_alpha"] = repr(result.final_alpha)
    out["improvement"] = repr(result.baseline_alpha - result.final_alpha)
    out["links_installed"] = len(result.iterations)
    out["stopped_early"] = str(result.stopped_early).lower()
    if result.stop_reason:
        out["stop_reason"] = result.stop_reason
    return out


def plan_table(result: PlanResult, meta: dict[str, Any]) -> str:
    lines = header_lines(plan_meta(result, meta))
    lines.append("iteration,gen_i,gen_k,alpha_max,marginal_gain")
    for index, gi, gk, alpha, gain in _plan_rows(result):
        lines.append(f"{index},{gi},{gk},{sig4(alpha)},{sig4(gain)}")
    return "\n".join(lines) + "\n"


def plan_document(result: PlanResult, meta: dict[str, Any]) -> dict[str, Any]:
    return {
        "meta": plan_meta(result, meta),
        "baseline_alpha": result.baseline_alpha,
        "final_alpha": result.final_alpha,
        "improvement": result.baseline_alpha - result.final_alpha,
        "stopped_early": result.stopped_early,
        "stop_reason": result.stop_reason,
        "iterations": [
            {
                "iteration": it.index,
                "gen_i": it.link[0] + 1,
                "gen_k": it.link[1] + 1,
                "alpha_max": it.alpha_max_after,
                "marginal_gain": it.marginal_gain,
            }
            for it in result.iterations
        ],
    }


# --- reduction --------------------------------------------------------------


def reduction_document(net: ReducedNetwork, op: OperatingPoint, meta: dict[str, Any]) -> dict[str, Any]:
    return {
        "meta": meta,
        "n": net.n,
        "e_mag": [float(v) for v in net.e_mag],
        "y_g": _complex_matrix(net.y_g),
        "c": _real_matrix(net.c),
        "d": _real_matrix(net.d),
        "delta_s": [float(v) for v in op.delta_s],
        "omega_s": float(op.omega_s),
        "p_m_const": [float(v) for v in op.p_m_const],
    }


def read_reduction_document(text: str) -> tuple[ReducedNetwork, OperatingPoint]:
    doc = json.loads(text)
    y_g = np.array([[complex(re, im) for re, im in row] for row in doc["y_g"]])
    net = ReducedNetwork(
        y_g=y_g,
        e_mag=np.array(doc["e_mag"], dtype=float),
        c=np.array(doc["c"], dtype=float),
        d=np.array(doc["d"], dtype=float),
    )
    op = OperatingPoint(
        delta_s=np.array(doc["delta_s"], dtype=float),
        omega_s=float(doc["omega_s"]),
        p_m_const=np.array(doc["p_m_const"], dtype=float),
    )
    return net, op


# --- trajectory -------------------------------------------------------------


def trajectory_table(traj: Trajectory, meta: dict[str, Any], footer: dict[str, Any]) -> str:
    """Delimited table: time, delta_1..delta_n, omega_1..omega_n, full precision."""
    n = traj.delta.shape[1]
    lines = header_lines(meta)
    columns = ["time"] + [f"delta_{i + 1}" for i in range(n)] + [f"omega_{i + 1}" for i in range(n)]
    lines.append(",".join(columns))
    for k in range(traj.times.size):
        values = [repr(float(traj.times[k]))]
        values += [repr(float(v)) for v in traj.delta[k]]
        values += [repr(float(v)) for v in traj.omega[k]]
        lines.append(",".join(values))
    lines += header_lines(footer)
    return "\n".join(lines) + "\n"


def trajectory_document(traj: Trajectory, meta: dict[str, Any], footer: dict[str, Any]) -> dict[str, Any]:
    return {
        "meta": meta,
        "dt": float(traj.dt),
        "times": [float(v) for v in traj.times],
        "delta": _real_matrix(traj.delta),
        "omega": _real_matrix(traj.omega),
        "summary": footer,
    }

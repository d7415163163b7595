"""Run configuration: JSON schema validation and domain-object construction.

Configs are plain JSON dicts.  Validation is strict (unknown keys are
rejected at every level) and collects all violations before any computation
starts; ``validate`` returns the list of diagnostics and ``build_*`` helpers
turn a validated config into toolkit objects.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .controls import ControlHamiltonian
from .errors import ConfigError
from .metrics import NoiseMetric
from .noise_process import MaternConfig, NoiseModelSpec
from .su_algebra import PAULIS, PauliFrame, pauli_frame

COMMANDS = ("simulate", "bounds", "geodesic", "optimize", "sweep", "wcnc")

NAMED_GATES = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H-gate": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0),
}

_TOP_KEYS = {
    "command", "system", "noise", "metric", "problem", "numeric", "seed",
    "output_dir",
}
_SYSTEM_KEYS = {"num_qubits", "drift"}
_NOISE_KEYS = {
    "kind", "nu", "length_scale", "amplitude", "bound", "coupled",
    "envelope_prefactor", "branches",
}
_BRANCH_KEYS = {"probability", "pauli", "scale", "matrix"}
_METRIC_KEYS = {"diag"}
_PROBLEM_KEYS = {"target", "horizon", "eta", "degree", "coefficients"}
_NUMERIC_KEYS = {
    "steps_per_unit", "samples", "num_controls", "tolerance", "max_restarts",
    "max_iters", "restarts", "epsilons", "deltas", "eta_grid", "amplitude_k",
    "worst_case_epsilon", "eval_steps_per_unit",
}
_OPERATOR_KEYS = {"pauli", "scale", "matrix"}
_MATRIX_KEYS = {"re", "im"}


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc


def _check_keys(d: dict, allowed: set, where: str, out: list):
    for key in d:
        if key not in allowed:
            out.append(f"{where}: unknown key {key!r}")


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _check_matrix_spec(spec, where: str, out: list, dim: int | None):
    if not isinstance(spec, dict):
        out.append(f"{where}: matrix must be an object with 're'/'im' arrays")
        return
    _check_keys(spec, _MATRIX_KEYS, where, out)
    if "re" not in spec:
        out.append(f"{where}: matrix needs an 're' array")
        return
    try:
        re = np.asarray(spec["re"], dtype=float)
        im = np.asarray(spec.get("im", np.zeros_like(re)), dtype=float)
    except (TypeError, ValueError):
        out.append(f"{where}: matrix entries must be numeric arrays")
        return
    if re.ndim != 2 or re.shape[0] != re.shape[1] or re.shape != im.shape:
        out.append(f"{where}: 're'/'im' must be equal square matrices")
    elif dim is not None and re.shape[0] != dim:
        out.append(f"{where}: matrix dim {re.shape[0]} does not match system dim {dim}")


def _check_operator_spec(spec, where: str, out: list, num_qubits: int | None):
    if spec is None:
        return
    if not isinstance(spec, dict):
        out.append(f"{where}: operator must be an object (pauli/scale or matrix)")
        return
    _check_keys(spec, _OPERATOR_KEYS, where, out)
    if "pauli" in spec and "matrix" in spec:
        out.append(f"{where}: give either 'pauli' or 'matrix', not both")
    if "pauli" in spec:
        word = spec["pauli"]
        if not isinstance(word, str) or not word or any(
            c not in "ixyz" for c in word.lower()
        ):
            out.append(f"{where}: 'pauli' must be a word over i/x/y/z")
        elif num_qubits is not None and len(word) != num_qubits:
            out.append(
                f"{where}: pauli word length {len(word)} does not match "
                f"num_qubits {num_qubits}"
            )
        if "scale" in spec and not _is_num(spec["scale"]):
            out.append(f"{where}: 'scale' must be a number")
    elif "matrix" in spec:
        dim = None if num_qubits is None else 2**num_qubits
        _check_matrix_spec(spec["matrix"], f"{where}.matrix", out, dim)
    else:
        out.append(f"{where}: operator needs 'pauli' or 'matrix'")


def validate(cfg) -> list[str]:
    """All schema and semantic violations of a config, without running it."""
    out: list[str] = []
    if not isinstance(cfg, dict):
        return ["config must be a JSON object"]
    _check_keys(cfg, _TOP_KEYS, "config", out)

    command = cfg.get("command")
    if command not in COMMANDS:
        out.append(f"config.command: must be one of {COMMANDS}, got {command!r}")

    system = cfg.get("system", {})
    num_qubits = None
    if not isinstance(system, dict):
        out.append("config.system: must be an object")
    else:
        _check_keys(system, _SYSTEM_KEYS, "config.system", out)
        nq = system.get("num_qubits", 1)
        if not isinstance(nq, int) or isinstance(nq, bool) or nq < 1:
            out.append(f"config.system.num_qubits: must be a positive integer, got {nq!r}")
        else:
            num_qubits = nq
        _check_operator_spec(system.get("drift"), "config.system.drift", out, num_qubits)

    noise = cfg.get("noise", {})
    if not isinstance(noise, dict):
        out.append("config.noise: must be an object")
        noise = {}
    else:
        _check_keys(noise, _NOISE_KEYS, "config.noise", out)
        kind = noise.get("kind", "zero")
        if kind not in ("squashed-matern", "squashed-wiener", "mixed-unitary", "zero"):
            out.append(f"config.noise.kind: unknown kind {kind!r}")
        for key in ("nu", "length_scale", "amplitude"):
            if key in noise and (not _is_num(noise[key]) or noise[key] <= 0):
                out.append(f"config.noise.{key}: must be a positive number")
        if "bound" in noise and (not _is_num(noise["bound"]) or noise["bound"] < 0):
            out.append("config.noise.bound: must be a nonnegative number")
        if "coupled" in noise and not isinstance(noise["coupled"], bool):
            out.append("config.noise.coupled: must be a boolean")
        if "envelope_prefactor" in noise and (
            not _is_num(noise["envelope_prefactor"]) or noise["envelope_prefactor"] <= 0
        ):
            out.append("config.noise.envelope_prefactor: must be a positive number")
        if kind == "mixed-unitary":
            branches = noise.get("branches")
            if not isinstance(branches, list) or not branches:
                out.append("config.noise.branches: mixed-unitary needs a nonempty list")
            else:
                total = 0.0
                for i, br in enumerate(branches):
                    where = f"config.noise.branches[{i}]"
                    if not isinstance(br, dict):
                        out.append(f"{where}: must be an object")
                        continue
                    _check_keys(br, _BRANCH_KEYS, where, out)
                    p = br.get("probability")
                    if not _is_num(p) or p < 0 or p > 1:
                        out.append(f"{where}.probability: must be a number in [0, 1]")
                    else:
                        total += p
                    _check_operator_spec(
                        {k: v for k, v in br.items() if k != "probability"},
                        where, out, num_qubits,
                    )
                if abs(total - 1.0) > 1e-12:
                    out.append(
                        f"config.noise.branches: probabilities sum to {total}, not 1"
                    )

    metric = cfg.get("metric", {})
    if not isinstance(metric, dict):
        out.append("config.metric: must be an object")
    else:
        _check_keys(metric, _METRIC_KEYS, "config.metric", out)
        diag = metric.get("diag")
        if diag is not None:
            if not isinstance(diag, list) or not all(_is_num(x) for x in diag):
                out.append("config.metric.diag: must be a list of numbers")
            elif any(x <= 0 for x in diag):
                out.append(
                    "config.metric.diag: weights must be strictly positive "
                    "(sub-Riemannian limit excluded)"
                )
            elif num_qubits is not None and len(diag) != 4**num_qubits - 1:
                out.append(
                    f"config.metric.diag: needs {4**num_qubits - 1} weights "
                    f"for {num_qubits} qubit(s), got {len(diag)}"
                )

    problem = cfg.get("problem", {})
    if not isinstance(problem, dict):
        out.append("config.problem: must be an object")
    else:
        _check_keys(problem, _PROBLEM_KEYS, "config.problem", out)
        target = problem.get("target")
        if target is not None and not (
            isinstance(target, str) and target in NAMED_GATES
        ):
            if isinstance(target, dict):
                dim = None if num_qubits is None else 2**num_qubits
                _check_matrix_spec(target, "config.problem.target", out, dim)
            else:
                out.append(
                    f"config.problem.target: must be one of {sorted(NAMED_GATES)} "
                    "or a matrix object"
                )
        if "horizon" in problem and (
            not _is_num(problem["horizon"]) or problem["horizon"] <= 0
        ):
            out.append("config.problem.horizon: must be a positive number")
        if "eta" in problem and (not _is_num(problem["eta"]) or problem["eta"] < 0):
            out.append("config.problem.eta: must be a nonnegative number")
        if "degree" in problem and (
            not isinstance(problem["degree"], int)
            or isinstance(problem["degree"], bool)
            or problem["degree"] < 0
        ):
            out.append("config.problem.degree: must be a nonnegative integer")
        if "coefficients" in problem:
            try:
                arr = np.asarray(problem["coefficients"], dtype=float)
                if arr.ndim != 2:
                    raise ValueError
            except (TypeError, ValueError):
                out.append(
                    "config.problem.coefficients: must be a 2-d numeric array "
                    "(directions x polynomial coefficients)"
                )

    numeric = cfg.get("numeric", {})
    if not isinstance(numeric, dict):
        out.append("config.numeric: must be an object")
    else:
        _check_keys(numeric, _NUMERIC_KEYS, "config.numeric", out)
        for key in ("steps_per_unit", "samples", "num_controls", "max_iters",
                    "max_restarts", "restarts", "eval_steps_per_unit"):
            if key in numeric and (
                not isinstance(numeric[key], int)
                or isinstance(numeric[key], bool)
                or numeric[key] < 1
            ) and not (key in ("max_restarts", "restarts") and numeric[key] == 0):
                out.append(f"config.numeric.{key}: must be a positive integer")
        if "tolerance" in numeric and (
            not _is_num(numeric["tolerance"]) or numeric["tolerance"] <= 0
        ):
            out.append("config.numeric.tolerance: must be a positive number")
        for key in ("epsilons", "deltas", "eta_grid"):
            if key in numeric:
                vals = numeric[key]
                if not isinstance(vals, list) or not vals or not all(
                    _is_num(v) for v in vals
                ):
                    out.append(f"config.numeric.{key}: must be a nonempty number list")
                elif key != "eta_grid" and any(v <= 0 for v in vals):
                    out.append(f"config.numeric.{key}: values must be positive")
                elif key == "eta_grid" and any(v < 0 for v in vals):
                    out.append("config.numeric.eta_grid: values must be nonnegative")
        for key in ("amplitude_k", "worst_case_epsilon"):
            if key in numeric and (not _is_num(numeric[key]) or numeric[key] < 0):
                out.append(f"config.numeric.{key}: must be a nonnegative number")

    if "seed" in cfg and (not isinstance(cfg["seed"], int) or isinstance(cfg["seed"], bool)):
        out.append("config.seed: must be an integer")
    if "output_dir" in cfg and not isinstance(cfg["output_dir"], str):
        out.append("config.output_dir: must be a string")
    return out


def require_valid(cfg) -> None:
    problems = validate(cfg)
    if problems:
        raise ConfigError("; ".join(problems))


# --------------------------------------------------------------------------
# Builders (assume a validated config)
# --------------------------------------------------------------------------


def _operator_from_spec(spec, num_qubits: int) -> np.ndarray:
    dim = 2**num_qubits
    if spec is None:
        return np.zeros((dim, dim), dtype=complex)
    if "pauli" in spec:
        word = spec["pauli"].upper()
        M = PAULIS[word[0]]
        for c in word[1:]:
            M = np.kron(M, PAULIS[c])
        return float(spec.get("scale", 1.0)) * M
    mat = spec["matrix"]
    re = np.asarray(mat["re"], dtype=float)
    im = np.asarray(mat.get("im", np.zeros_like(re)), dtype=float)
    return re + 1j * im


def build_frame(cfg) -> PauliFrame:
    return pauli_frame(cfg.get("system", {}).get("num_qubits", 1))


def build_drift(cfg) -> np.ndarray:
    system = cfg.get("system", {})
    return _operator_from_spec(system.get("drift"), system.get("num_qubits", 1))


def build_control(cfg) -> ControlHamiltonian:
    frame = build_frame(cfg)
    problem = cfg.get("problem", {})
    degree = problem.get("degree", 5)
    horizon = problem.get("horizon", 1.0)
    coeffs = problem.get("coefficients")
    if coeffs is None:
        coeffs = np.zeros((frame.size, degree + 1))
    else:
        coeffs = np.asarray(coeffs, dtype=float)
    return ControlHamiltonian(frame, build_drift(cfg), coeffs, horizon)


def build_metric(cfg) -> NoiseMetric | None:
    diag = cfg.get("metric", {}).get("diag")
    if diag is None:
        return None
    return NoiseMetric(build_frame(cfg), np.asarray(diag, dtype=float))


def build_noise_spec(cfg) -> NoiseModelSpec:
    noise = cfg.get("noise", {})
    kind = noise.get("kind", "zero")
    matern = None
    if kind in ("squashed-matern", "squashed-wiener"):
        matern = MaternConfig(
            nu=noise.get("nu", 0.6),
            length_scale=noise.get("length_scale", 0.2),
            amplitude=noise.get("amplitude", 1.0),
        )
    branches = ()
    if kind == "mixed-unitary":
        num_qubits = cfg.get("system", {}).get("num_qubits", 1)
        branches = tuple(
            (
                float(br["probability"]),
                _operator_from_spec(
                    {k: v for k, v in br.items() if k != "probability"}, num_qubits
                ),
            )
            for br in noise["branches"]
        )
    return NoiseModelSpec(
        kind=kind,
        matern=matern,
        bound=noise.get("bound", 1.0),
        branches=branches,
        coupled=noise.get("coupled", False),
        envelope_prefactor=noise.get("envelope_prefactor", 1.0),
    )


def build_target(cfg) -> np.ndarray:
    """Target unitary with the determinant phase removed (principal root),
    so that downstream SU(n) preconditions hold."""
    problem = cfg.get("problem", {})
    target = problem.get("target", "X")
    if isinstance(target, str):
        V = NAMED_GATES[target].copy()
    else:
        re = np.asarray(target["re"], dtype=float)
        im = np.asarray(target.get("im", np.zeros_like(re)), dtype=float)
        V = re + 1j * im
    n = V.shape[0]
    det = np.linalg.det(V)
    if abs(abs(det) - 1.0) > 1e-8:
        raise ConfigError("problem.target must be unitary")
    return V * np.exp(-1j * np.angle(det) / n)

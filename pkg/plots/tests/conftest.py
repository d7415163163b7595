import json
import subprocess
import sys

import pytest

PILOT_SEED = 2024


def run_qctl(command: str, cfg: dict, out_dir: str) -> None:
    """Drive the simulation toolkit through its CLI (the only interface the
    plotting layer is allowed to touch)."""
    cfg_path = f"{out_dir}_cfg.json"
    with open(cfg_path, "w") as fh:
        json.dump(cfg, fh)
    subprocess.run(
        [sys.executable, "-m", "rodeqc.cli", command,
         "--config", cfg_path, "--out", out_dir],
        check=True,
        capture_output=True,
    )


@pytest.fixture(scope="session")
def pilot_dir(tmp_path_factory):
    """Small seeded pilot runs producing every CSV schema the renderer reads."""
    base = tmp_path_factory.mktemp("pilot")

    run_qctl(
        "simulate",
        {
            "command": "simulate",
            "system": {"num_qubits": 1, "drift": {"pauli": "y", "scale": 0.5}},
            "noise": {"kind": "squashed-matern", "nu": 0.6, "length_scale": 0.2,
                      "amplitude": 1.0, "bound": 1.0},
            "problem": {"horizon": 1.0, "eta": 1.0},
            "numeric": {"steps_per_unit": 150, "samples": 10},
            "seed": PILOT_SEED,
        },
        str(base / "sim"),
    )

    run_qctl(
        "optimize",
        {
            "command": "optimize",
            "system": {"num_qubits": 1, "drift": {"pauli": "y", "scale": 0.5}},
            "metric": {"diag": [1.0, 0.01, 0.01]},
            "problem": {"target": "X", "horizon": 1.0, "eta": 1.0},
            "numeric": {"steps_per_unit": 100, "samples": 6, "num_controls": 3,
                        "max_iters": 500, "restarts": 0},
            "seed": PILOT_SEED,
        },
        str(base / "opt"),
    )

    run_qctl(
        "sweep",
        {
            "command": "sweep",
            "system": {"num_qubits": 1, "drift": {"pauli": "y", "scale": 0.5}},
            "metric": {"diag": [1.0, 0.01, 0.01]},
            "problem": {"target": "X", "horizon": 1.0, "eta": 1.0},
            "numeric": {"steps_per_unit": 100, "samples": 4, "num_controls": 3,
                        "max_iters": 300, "restarts": 0,
                        "eta_grid": [0.0, 1.0, 2.0]},
            "seed": PILOT_SEED,
        },
        str(base / "sweep"),
    )
    return base

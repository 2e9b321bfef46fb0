import subprocess
import sys
from pathlib import Path

import pytest

DEMOS = Path(__file__).resolve().parent.parent / "demos"


@pytest.mark.parametrize(
    "script, args",
    [
        ("readout_walkthrough.py", []),
        ("readout_time_sweep.py", ["--trials", "10"]),
        ("bin_width_sweep.py", ["--trials", "10"]),
        ("rabi_priors.py", ["--trials", "40"]),
        ("calibration_walkthrough.py", []),
    ],
)
def test_demo_runs(script, args):
    proc = subprocess.run([sys.executable, str(DEMOS / script), *args], capture_output=True, text=True, timeout=300)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip()

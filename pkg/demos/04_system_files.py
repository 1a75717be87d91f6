"""Load systems from JSON/TOML and drive the command line from Python.

Run with ``python3 demos/04_system_files.py``.
"""

from pathlib import Path

from delayssm import load_system, roots_right_of
from delayssm.cli import main

here = Path(__file__).parent / "systems"
for name in ("cushing.json", "sine_delay.toml", "cubic_hopf.json"):
    s = load_system(here / name)
    sl = roots_right_of(-1.0, s.kernel)
    print(f"{name:<16} n = {s.n}, h = {s.h:.4f}, roots right of -1: {len(sl.roots)}")

print("\nThe same through the CLI (JSON on stdout):")
main(["im-check", "--system", str(here / "sine_delay.toml"), "--route", "small-delay"])

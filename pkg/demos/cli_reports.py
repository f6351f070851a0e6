"""
Reproducible reports from the command line
==========================================

Every experiment can be described by one config file and run with
``hardy-verify run <config>``.  This script does the same through
:func:`multipolar_hardy.cli.main` and shows the CSV it writes.
"""

from pathlib import Path

from multipolar_hardy import cli

here = Path(__file__).parent
print(cli.list_experiments())

# %%
for name in ("reduction_flat.json", "bounds_sphere.json", "sweep_hyperbolic.json"):
    code = cli.main(["run", str(here / "configs" / name)])
    print(name, "exit code", code)

print(Path("reports/sweep_hyperbolic.csv").read_text())

"""
Driving runs from the command line
==================================

The ``dissipator`` command wraps every experiment.  This script calls the
same entry point in-process and shows what lands on disk.
"""

# %%
import json
import pathlib
import tempfile

from dissipator.cli import main

out = pathlib.Path(tempfile.mkdtemp())

# %%
# Closed forms print a single number.
main(["analytic", "thermal", "--f", "5.594GHz", "--T", "115mK"])

# %%
# Sweeps write long-format CSV plus a manifest.  Partial axis settings
# fill in from the default grid.
main(["ringdown", "--out", str(out / "ringdown"), "--set", "sweep.omega_p.num=5", "--set", "sweep.g_p.num=3"])
manifest = json.loads((out / "ringdown" / "manifest.json").read_text())
print([f["path"] for f in manifest["files"]], manifest["results"]["max_rate_per_us"])
print((out / "ringdown" / "ringdown.csv").read_text().splitlines()[:4])

# %%
# Errors come back as JSON on stderr with exit code 2 (config) or 3 (numerics).
code = main(["analytic", "thermal", "--f", "5.594", "--T", "115mK"])
print("exit code:", code)

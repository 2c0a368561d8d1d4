# %% [markdown]
# # Command-line walkthrough
#
# The same pipeline driven through `dualdomain` subcommands, writing DDT
# files into a scratch directory.

# %%
import json
import subprocess
import tempfile
from pathlib import Path

work = Path(tempfile.mkdtemp())


def sh(*args):
    cmd = ["dualdomain", *map(str, args)]
    print("$", " ".join(cmd))
    done = subprocess.run(cmd, capture_output=True, text=True)
    print(done.stdout or "", done.stderr or "", f"[exit {done.returncode}]")
    return done.returncode


# %%
sh("phantom", "--kind", "shepp-logan", "--size", 64, "--out", work / "clean.ddt")
sh("-v", "simulate", "--input", work / "clean.ddt", "--severity", "light", "--seed", 4,
   "--max-rot-deg", 0.5, "--mm-per-px", 20,
   "--out", work / "k.ddt", "--mask-out", work / "gt.ddt", "--motion-log", work / "motion.json")
print(json.dumps(json.loads((work / "motion.json").read_text())["segments"][:3], indent=1))

# %%
sh("-v", "mask", "--method", "detector", "--input", work / "k.ddt", "--out", work / "det.ddt")
sh("mask", "--method", "oracle", "--motion-log", work / "motion.json", "--out", work / "oracle.ddt")

# %%
sh("-v", "reconstruct", "--input", work / "k.ddt", "--mask", work / "oracle.ddt",
   "--motion-log", work / "motion.json", "--out", work / "recon.ddt", "--log", work / "train.csv")
print((work / "train.csv").read_text().splitlines()[:3])

# %%
sh("evaluate", "--recon", work / "recon.ddt", "--ref", work / "clean.ddt", "--out", work / "report.json")
print((work / "report.json").read_text())

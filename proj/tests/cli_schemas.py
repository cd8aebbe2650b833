"""Runs every CLI subcommand on a small configuration, validates the output
against the shipped schema, and checks reruns, exit codes and CSV layouts."""

import csv
import json
import math
import os
import subprocess
import sys
import tempfile

import jsonschema

CLI, SCHEMAS = sys.argv[1], sys.argv[2]
failures = []


def run(args, expect=0):
    r = subprocess.run([CLI] + args, capture_output=True, text=True)
    if r.returncode != expect:
        failures.append(f"{args}: exit {r.returncode}, wanted {expect}: {r.stderr.strip()}")
    return r


def validate(name, doc):
    schema = json.load(open(os.path.join(SCHEMAS, name + ".schema.json")))
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as e:
        failures.append(f"{name}: {e.message}")


def strip_clock(doc):
    doc = json.loads(json.dumps(doc))
    doc["meta"].pop("wall_clock")
    return doc


tmp = tempfile.mkdtemp()
cases = {
    "powers": ["powers", "--n", "16", "--k-max", "2", "--out", f"{tmp}/pw"],
    "projection": ["projection", "--n", "128", "--out", f"{tmp}/pj"],
    "weyl": ["weyl", "--n", "128", "--out", f"{tmp}/weyl"],
    "variance": ["variance", "--n", "64", "128", "--out", f"{tmp}/var"],
    "randomwave": ["randomwave", "--n", "128", "--samples", "24", "--seed", "5", "--out", f"{tmp}/rw"],
    "walsh": ["walsh", "--d", "2", "--k", "5", "--seed", "3", "--out", f"{tmp}/walsh"],
    "exceptional": ["exceptional", "--k-min", "5", "--k-max", "6", "--out", f"{tmp}/exc"],
}
for name, args in cases.items():
    run(args)
    out = args[args.index("--out") + 1] + ".json"
    first = json.load(open(out))
    validate(name, first)
    run(args)
    second = json.load(open(out))
    if strip_clock(first) != strip_clock(second):
        failures.append(f"{name}: rerun differs outside the wall clock")
    if first["meta"]["determinism_hash"] != second["meta"]["determinism_hash"]:
        failures.append(f"{name}: determinism hash differs between reruns")
    if first["meta"]["config"]["subcommand"] != name:
        failures.append(f"{name}: config echo missing")

# B_2 has four entries of modulus 2^{-1/2}
run(["powers", "--n", "2", "--k-max", "1", "--out", f"{tmp}/b2"])
rows = list(csv.DictReader(open(f"{tmp}/b2_k1.csv")))
if len(rows) != 4 or any(abs(float(r["abs"]) - 2 ** -0.5) > 1e-9 for r in rows):
    failures.append("powers n=2: entries are not all 1/sqrt(2)")
if list(rows[0].keys()) != ["x", "y", "abs"]:
    failures.append("heatmap header is not x,y,abs")

# full-circle window gives the identity
run(["projection", "--n", "16", "--start", "0", "--len", repr(2 * math.pi), "--out", f"{tmp}/full"])
for r in csv.DictReader(open(f"{tmp}/full.csv")):
    want = 1.0 if r["x"] == r["y"] else 0.0
    if abs(float(r["abs"]) - want) > 1e-8:
        failures.append("full-circle projector is not the identity")
        break

# flat CSV rendering
r = run(["weyl", "--n", "64", "--format", "csv"])
lines = r.stdout.splitlines()
if not lines or lines[0] != "key,value" or not any(l.startswith("report.count,") for l in lines):
    failures.append("csv format missing key,value rows")

# exit codes
run(["weyl", "--n", "7"], expect=2)
run(["weyl", "--n", "64", "--len", "-1"], expect=2)
run(["walsh", "--d", "1", "--k", "3"], expect=2)
run(["nosuchcommand"], expect=2)
run(["weyl", "--n", "16", "--len", "0.05", "--check"], expect=3)
env = dict(os.environ, BAKERLAB_THREADS="zero")
if subprocess.run([CLI, "weyl", "--n", "8"], env=env, capture_output=True).returncode != 2:
    failures.append("bad BAKERLAB_THREADS not rejected")

for f in failures:
    print("FAIL:", f)
print("cli checks:", "all passed" if not failures else f"{len(failures)} failures")
sys.exit(1 if failures else 0)

#!/usr/bin/env python3
"""Runs each sbr subcommand on small inputs and validates the JSON output."""

import csv
import io
import json
import os
import subprocess
import sys
import tempfile

import jsonschema

SBR, ROOT = sys.argv[1], sys.argv[2]
DATA = os.path.join(ROOT, "tests", "data")
SCHEMA = os.path.join(ROOT, "docs", "schema")

failures = []


def run(args, expect=0, env=None):
    p = subprocess.run([SBR, *args], capture_output=True, text=True, env=env)
    if p.returncode != expect:
        failures.append(f"{args}: exit {p.returncode}, stderr {p.stderr.strip()}")
    return p.stdout


def check(name, cond, detail=""):
    print(("PASS " if cond else "FAIL ") + name + (f" ({detail})" if detail and not cond else ""))
    if not cond:
        failures.append(name)


cases = {
    "prob": ["prob", "--theta", "0.5,1.5707963267948966,2.5", "--routes", "exact,quadrature,mc,pde",
             "--trials", "2000", "--grid-n", "49"],
    "ratio": ["ratio", "--problem", "maxcut", "--half-sweep", "--theta-step", "0.5", "--grid-n", "49", "--rows"],
    "round": ["round", os.path.join(DATA, "c5.graph"), "--trials", "20"],
    "pde": ["pde", "--theta", "2.0", "--grid-n", "49", "--query", "0.1,0.2"],
    "verify": ["verify", "--quick"],
    "constrained": ["constrained", os.path.join(DATA, "c6.graph"), os.path.join(DATA, "c6.constraints"),
                    "--eps", "0.34", "--trials", "10"],
}

for name, args in cases.items():
    with open(os.path.join(SCHEMA, f"{name}.schema.json")) as f:
        schema = json.load(f)
    out = run(args)
    try:
        doc = json.loads(out)
        jsonschema.validate(doc, schema)
        check(f"schema.{name}", True)
    except (json.JSONDecodeError, jsonschema.ValidationError) as e:
        check(f"schema.{name}", False, str(e).splitlines()[0])
        continue
    # Same seed: identical bytes once the meta block is gone.
    a = run(["--no-meta", *args])
    b = run(["--no-meta", *args])
    doc.pop("meta", None)
    check(f"replay.{name}", a == b and json.loads(a) == doc)

# CSV round trip keeps every digit.
csv_text = run(["--format", "csv", "prob", "--sweep", "0.1:3.1:0.5"])
js = json.loads(run(["--no-meta", "prob", "--sweep", "0.1:3.1:0.5"]))
rows = list(csv.DictReader(io.StringIO(csv_text)))
same = len(rows) == len(js["result"]["rows"]) and all(
    float(r[k]) == j[k] for r, j in zip(rows, js["result"]["rows"]) for k in ("theta", "exact", "quadrature"))
check("prob.csv_round_trip", same)
col = [float(r["quadrature"]) for r in rows]
check("prob.monotone", all(x < y for x, y in zip(col, col[1:])))

# Environment seed, then flags over the config file.
env = dict(os.environ, SBR_SEED="42")
check("env.seed", json.loads(run(["--no-meta", *cases["round"]], env=env))["config"]["seed"] == 42)
with tempfile.NamedTemporaryFile("w", suffix=".cfg", delete=False) as cfg:
    cfg.write("# manifest\ntrials = 7\ngamma=0.02\nseed=5\n")
doc = json.loads(run(["--no-meta", "--config", cfg.name, *cases["round"]]))
check("config.flags_win", doc["config"]["trials"] == 20 and doc["config"]["gamma"] == 0.02
      and doc["config"]["seed"] == 5)
os.unlink(cfg.name)

# Mutation and error paths.
doc = json.loads(run(["--no-meta", "verify", "--quick", "--inject-g2-sign"], expect=1))
check("verify.mutation_fails", not doc["result"]["pass"] and "maxprinciple.g2.ratio" in doc["result"]["failing"])
with tempfile.NamedTemporaryFile("w", suffix=".graph", delete=False) as bad:
    bad.write("3 1\n0 7\n")
p = subprocess.run([SBR, "round", bad.name], capture_output=True, text=True)
check("round.parse_error", p.returncode != 0 and "line 2" in p.stderr)
os.unlink(bad.name)

print("FAILED: " + ", ".join(failures) if failures else "all CLI checks passed")
sys.exit(1 if failures else 0)

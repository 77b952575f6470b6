"""Runs the CLI suite, validating every JSON report against the schema."""

import json
import pathlib
import subprocess
import sys

import jsonschema


def main():
    cli, data, schema_path = sys.argv[1], pathlib.Path(sys.argv[2]), sys.argv[3]
    schema = json.loads(pathlib.Path(schema_path).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    failures = 0
    runs = 0
    for line in (data / "cli_suite.txt").read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        expected, *args = line.replace("{data}", str(data)).split()
        proc = subprocess.run([cli, *args], capture_output=True, text=True)
        runs += 1
        problems = []
        if proc.returncode != int(expected):
            problems.append(f"exit {proc.returncode}, expected {expected}: {proc.stderr.strip()}")
        if "--csv" in args:
            header = proc.stdout.splitlines()[0] if proc.stdout else ""
            if not header.startswith("t,x1"):
                problems.append(f"bad CSV header {header!r}")
        else:
            try:
                report = json.loads(proc.stdout)
            except json.JSONDecodeError as e:
                problems.append(f"not JSON: {e}")
            else:
                for err in validator.iter_errors(report):
                    path = "/".join(str(p) for p in err.absolute_path)
                    problems.append(f"schema: {path}: {err.message}")
        status = "ok" if not problems else "FAILED"
        print(f"{status}: {' '.join(args)}")
        for p in problems:
            print(f"    {p}")
        failures += bool(problems)

    # the schema has teeth: corrupted reports are rejected
    proc = subprocess.run([cli, "spin", "--input", str(data / "two_loop_mm.ode")], capture_output=True, text=True)
    good = json.loads(proc.stdout)
    corruptions = {
        "missing config": lambda r: r.pop("config"),
        "spin value 2": lambda r: r["result"]["sigma"].update({"1": 2}),
        "zero-based vertex": lambda r: r["result"]["sigma"].update({"0": 1}),
        "unknown status": lambda r: r.update({"status": "fine"}),
        "error on success": lambda r: r.update({"error": {"message": "x"}}),
    }
    for name, corrupt in corruptions.items():
        report = json.loads(json.dumps(good))
        corrupt(report)
        runs += 1
        rejected = not validator.is_valid(report)
        print(f"{'ok' if rejected else 'FAILED'}: schema rejects {name}")
        failures += not rejected

    # usage errors write nothing to stdout
    for args in (["analyze", "--input", str(data / "missing.ode")], ["analyze"], ["frobnicate", "--input", "x"]):
        proc = subprocess.run([cli, *args], capture_output=True, text=True)
        runs += 1
        ok = proc.returncode == 2 and proc.stdout == "" and proc.stderr != ""
        print(f"{'ok' if ok else 'FAILED'}: {' '.join(args)} -> exit {proc.returncode}")
        failures += not ok

    print(f"{runs - failures}/{runs} runs ok")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())

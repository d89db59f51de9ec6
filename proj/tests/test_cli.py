#!/usr/bin/env python3
"""End-to-end checks of the glasskit command-line tool."""
import argparse
import csv
import json
import math
import os
import subprocess
import sys
import tempfile
import unittest

import jsonschema

ARGS = None


def run(*argv, check=None):
    proc = subprocess.run([ARGS.cli, *map(str, argv)], capture_output=True, text=True, timeout=600)
    if check is not None and proc.returncode != check:
        raise AssertionError(f"{argv}: exit {proc.returncode}, expected {check}\nstderr: {proc.stderr}")
    return proc


def mixture(name):
    return os.path.join(ARGS.data, name)


def schema(command):
    with open(os.path.join(ARGS.schemas, f"{command}.schema.json")) as f:
        return json.load(f)


def parse_csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# glasskit "), lines[0]
    assert " config=" in lines[0]
    return list(csv.DictReader(lines[1:]))


class CsvOutput(unittest.TestCase):
    def test_thresholds_pure2(self):
        out = run("thresholds", "--mixture", mixture("pure2.toml"), check=0).stdout
        rows = parse_csv(out)
        self.assertEqual(len(rows), 1)
        self.assertEqual(
            list(rows[0]),
            ["mixture_id", "beta_cont", "beta_c", "beta_dis", "beta_bar_d", "beta_d", "transition", "q_c",
             "geometry"],
        )
        self.assertEqual(rows[0]["mixture_id"], "pure2")
        self.assertAlmostEqual(float(rows[0]["beta_c"]), 1 / math.sqrt(2), places=6)
        self.assertEqual(rows[0]["transition"], "continuous")

    def test_thresholds_mixed_is_discontinuous(self):
        row = parse_csv(run("thresholds", "--mixture", mixture("mixed.toml"), check=0).stdout)[0]
        self.assertEqual(row["mixture_id"], "mixed23")
        self.assertEqual(row["transition"], "discontinuous")
        self.assertLess(float(row["beta_c"]), float(row["beta_cont"]))

    def test_parisi_range(self):
        rows = parse_csv(run("parisi", "--mixture", mixture("pure2.toml"), "--beta-range", 0.2, 0.6, 3, check=0).stdout)
        self.assertEqual([float(r["beta"]) for r in rows], [0.2, 0.4, 0.6])
        for r in rows:
            self.assertAlmostEqual(float(r["value"]), float(r["beta"]) ** 2 / 2, places=8)
            self.assertEqual(r["geometry"], "sphere")

    def test_reruns_are_byte_identical(self):
        with tempfile.TemporaryDirectory() as d:
            outputs = []
            for i in range(2):
                path = os.path.join(d, f"run{i}.csv")
                run("mc", "--mixture", mixture("pure2.toml"), "--n", 6, "--beta", 0.3, "--seed", 5, "--samples", 2,
                    "--nishimori-samples", 100, "-o", path, check=0)
                with open(path, "rb") as f:
                    outputs.append(f.read())
            self.assertEqual(outputs[0], outputs[1])
            self.assertEqual(sorted(os.listdir(d)), ["run0.csv", "run1.csv"])  # no temporaries left behind

    def test_config_hash_tracks_arguments(self):
        a = run("thresholds", "--mixture", mixture("pure2.toml"), check=0).stdout.splitlines()[0]
        b = run("thresholds", "--mixture", mixture("pure2.toml"), check=0).stdout.splitlines()[0]
        c = run("thresholds", "--mixture", mixture("pure3.toml"), check=0).stdout.splitlines()[0]
        self.assertEqual(a, b)
        self.assertNotEqual(a, c)


class JsonOutput(unittest.TestCase):
    def check(self, command, *argv):
        proc = run(command, *argv, "--format", "json", check=0)
        doc = json.loads(proc.stdout)
        jsonschema.validate(doc, schema(command))
        return doc

    def test_thresholds(self):
        doc = self.check("thresholds", "--mixture", mixture("pure3.toml"))
        self.assertEqual(doc["result"]["beta_cont"], "inf")
        self.assertAlmostEqual(doc["result"]["beta_c"], 1.20656, places=4)

    def test_parisi(self):
        doc = self.check("parisi", "--mixture", mixture("pure2.toml"), "--beta", 0.5)
        self.assertAlmostEqual(doc["result"]["rows"][0]["value"], 0.125, places=8)

    def test_scan(self):
        doc = self.check("scan", "--mixture", mixture("pure3.toml"), "--beta-range", 0.5, 1.0, 2)
        self.assertTrue(all(r["replica_symmetric"] for r in doc["result"]["rows"]))

    def test_construct_example(self):
        proc = run("construct-example", "--p", 4, check=0)
        doc = json.loads(proc.stdout)  # JSON is the default for this command
        jsonschema.validate(doc, schema("construct-example"))
        self.assertEqual(doc["result"]["transition"], "continuous")
        self.assertLess(doc["result"]["lo"], doc["result"]["hi"])

    def test_mc(self):
        doc = self.check("mc", "--mixture", mixture("pure2.toml"), "--n", 6, "--beta", 0.3, "--samples", 2,
                         "--nishimori-samples", 50)
        self.assertEqual(len(doc["result"]["rows"]), 2)

    def test_fp_stdout(self):
        doc = self.check("fp", "--mixture", mixture("pure2.toml"), "--beta", 0.5, "--method", "annealed")
        self.assertEqual(len(doc["result"]["grid"]), 2000)
        self.assertFalse(doc["result"]["shattering"]["shattered"])


class FranzParisi(unittest.TestCase):
    def test_csv_and_sidecar(self):
        with tempfile.TemporaryDirectory() as d:
            path = os.path.join(d, "fp.csv")
            run("fp", "--mixture", mixture("pure3.toml"), "--beta", 1.18, "--method", "duality", "-o", path, check=0)
            with open(path) as f:
                rows = parse_csv(f.read())
            self.assertEqual(list(rows[0]), ["q", "value", "method", "beta", "geometry"])
            self.assertEqual(len(rows), 2000)
            qs = [float(r["q"]) for r in rows]
            self.assertTrue(all(a < b for a, b in zip(qs, qs[1:])))
            with open(path + ".json") as f:
                side = json.load(f)
            jsonschema.validate(side, schema("fp"))
            rep = side["result"]["shattering"]
            self.assertTrue(rep["shattered"])
            self.assertLess(rep["q1"], rep["q2"])
            self.assertGreater(rep["certificate_gap"], 0)

    def test_bound_invalid_above_beta_c(self):
        proc = run("fp", "--mixture", mixture("pure3.toml"), "--beta", 1.5, "--method", "duality", check=2)
        self.assertIn("BoundInvalid", proc.stderr)

    def test_rs_ansatz_is_ising_only(self):
        run("fp", "--mixture", mixture("pure2.toml"), "--beta", 0.5, "--method", "rs", check=2)
        run("fp", "--mixture", mixture("pure2.toml"), "--beta", 0.5, "--method", "rs", "--geometry", "ising",
            "--points", 100, check=0)


class Errors(unittest.TestCase):
    def test_usage_errors(self):
        run(check=2)
        run("thresholds", check=2)
        run("fp", "--mixture", mixture("pure2.toml"), "--beta", 0.5, "--method", "nope", check=2)

    def test_missing_file(self):
        proc = run("thresholds", "--mixture", "/nonexistent/x.toml", check=2)
        self.assertIn("x.toml", proc.stderr)

    def test_bad_key_is_named(self):
        with tempfile.NamedTemporaryFile("w", suffix=".toml", delete=False) as f:
            f.write("[mixture]\nx = 1.0\n")
        try:
            proc = run("thresholds", "--mixture", f.name, check=2)
            self.assertIn("'x'", proc.stderr)
        finally:
            os.unlink(f.name)

    def test_construct_p3_is_empty(self):
        proc = run("construct-example", "--p", 3, check=3)
        self.assertIn("EmptyInterval", proc.stderr)

    def test_mc_too_large(self):
        run("mc", "--mixture", mixture("pure2.toml"), "--n", 30, "--beta", 0.3, check=2)


def main():
    global ARGS
    parser = argparse.ArgumentParser()
    parser.add_argument("--cli", required=True)
    parser.add_argument("--data", required=True)
    parser.add_argument("--schemas", required=True)
    ARGS, rest = parser.parse_known_args()
    unittest.main(argv=[sys.argv[0], *rest], verbosity=2)


if __name__ == "__main__":
    main()

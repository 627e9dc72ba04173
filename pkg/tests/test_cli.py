import json
import os
import subprocess
import sys

import pytest

QPC = [sys.executable, "-m", "qpc.cli"]


def run_cli(*args, env_extra=None):
    env = dict(os.environ)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        QPC + list(args), capture_output=True, text=True, env=env, timeout=600
    )


class TestCount:
    def test_star_b3(self):
        res = run_cli("count", "--kind", "star", "--B", "3", "--no-timing")
        assert res.returncode == 0
        assert res.stdout.splitlines() == [
            "kind,bound,exact,predicted,ratio,seconds",
            "star,3,544,,,0",
        ]

    def test_primitive_b2(self):
        res = run_cli("count", "--kind", "primitive", "--B", "2", "--no-timing")
        assert res.returncode == 0
        assert res.stdout.splitlines()[1] == "primitive,2,96,,,0"

    def test_star_b0(self):
        res = run_cli("count", "--kind", "star", "--B", "0", "--no-timing")
        assert res.returncode == 0
        assert res.stdout.splitlines()[1] == "star,0,0,,,0"

    def test_projective_halves(self):
        res = run_cli("count", "--kind", "primitive", "--B", "2", "--projective", "--no-timing")
        assert res.stdout.splitlines()[1] == "primitive,2,48,,,0"

    def test_json_schema(self):
        res = run_cli("count", "--kind", "star", "--B", "3", "--format", "json", "--no-timing")
        rows = json.loads(res.stdout)
        assert rows == [
            {
                "kind": "star",
                "bound": 3,
                "exact": "544",
                "predicted": None,
                "ratio": None,
                "seconds": 0,
            }
        ]

    def test_resource_exit_2(self):
        res = run_cli("count", "--kind", "star", "--B", "50", "--sieve-limit", "10")
        assert res.returncode == 2

    def test_invalid_args_exit_1(self):
        assert run_cli("count", "--kind", "star").returncode == 1
        assert run_cli("count", "--kind", "wat", "--B", "3").returncode == 1


class TestTable:
    def test_rows_match_counting(self):
        res = run_cli(
            "table", "--kind", "N_star", "--bounds", "10,100",
            "--prime-limit", "10000", "--no-timing",
        )
        assert res.returncode == 0
        lines = res.stdout.splitlines()
        assert lines[0] == "kind,bound,exact,predicted,ratio,seconds"
        assert lines[1].startswith("N_star,10,19840,")
        assert lines[2].startswith("N_star,100,21467264,")

    def test_empty_bounds_header_only(self):
        res = run_cli("table", "--kind", "T", "--bounds", "", "--no-timing")
        assert res.returncode == 0
        assert res.stdout.splitlines() == ["kind,bound,exact,predicted,ratio,seconds"]

    def test_malformed_bounds_exit_1(self):
        assert run_cli("table", "--kind", "T", "--bounds", "10,x").returncode == 1

    def test_variants_emitted(self):
        paper = run_cli(
            "table", "--kind", "N_star", "--bounds", "100", "--variant", "paper",
            "--prime-limit", "10000", "--no-timing",
        ).stdout
        chain = run_cli(
            "table", "--kind", "N_star", "--bounds", "100", "--variant", "chain",
            "--prime-limit", "10000", "--no-timing",
        ).stdout
        p_pred = float(paper.splitlines()[1].split(",")[3])
        c_pred = float(chain.splitlines()[1].split(",")[3])
        assert c_pred / p_pred == pytest.approx(4.0 / 3.0, abs=1e-12)


class TestVerify:
    def test_formal_suite_passes(self):
        res = run_cli("verify", "--suite", "formal")
        assert res.returncode == 0
        assert "PASS formal_identity_1" in res.stdout
        assert "PASS formal_identity_2" in res.stdout

    def test_unknown_suite_exit_1(self):
        assert run_cli("verify", "--suite", "bogus").returncode == 1

    def test_impossible_tolerance_exit_3(self):
        res = run_cli("verify", "--suite", "global", "--tolerance", "1e-30")
        assert res.returncode == 3
        assert "FAIL" in res.stdout

    def test_telescope_suite(self):
        res = run_cli("verify", "--suite", "telescope")
        assert res.returncode == 0
        assert res.stdout.count("PASS") == 3


class TestConstant:
    def test_deterministic_and_parsable(self):
        a = run_cli("constant", "--prime-limit", "20000", "--format", "json")
        b = run_cli("constant", "--prime-limit", "20000", "--format", "json")
        assert a.returncode == 0 and a.stdout == b.stdout
        data = json.loads(a.stdout)
        for key in (
            "C4",
            "c1_residue_route",
            "c0",
            "C4star_paper",
            "C4star_chain",
            "C4star_paper_over_zeta3",
            "C4star_chain_over_zeta3",
        ):
            assert key in data
            assert "value" in data[key] and "error_bound" in data[key]
        ratio = data["variant_ratio_chain_over_paper"]["value"]
        assert ratio == pytest.approx(4.0 / 3.0, abs=1e-15)

    def test_small_prime_limits_differ(self):
        a = run_cli("constant", "--prime-limit", "2").stdout
        b = run_cli("constant", "--prime-limit", "3").stdout
        a_c4 = float(a.splitlines()[1].split(",")[1])
        b_c4 = float(b.splitlines()[1].split(",")[1])
        assert a_c4 != b_c4

    def test_prime_limit_guard(self):
        assert run_cli("constant", "--prime-limit", "1").returncode == 1


class TestGolden:
    def test_byte_identical_across_runs_and_threads(self):
        args = (
            "table", "--kind", "T", "--bounds", "10,100,1000",
            "--prime-limit", "5000", "--no-timing",
        )
        runs = [
            run_cli(*args, env_extra={"QPC_THREADS": "1"}).stdout,
            run_cli(*args, env_extra={"QPC_THREADS": "1"}).stdout,
            run_cli(*args, env_extra={"QPC_THREADS": "4"}).stdout,
            run_cli(*args, "--threads", "3").stdout,
        ]
        assert len(set(runs)) == 1

        jargs = args + ("--format", "json")
        j1 = run_cli(*jargs, env_extra={"QPC_THREADS": "2"}).stdout
        j2 = run_cli(*jargs, env_extra={"QPC_THREADS": "5"}).stdout
        assert j1 == j2
        json.loads(j1)

    def test_reals_carry_17_significant_digits(self):
        res = run_cli(
            "table", "--kind", "T", "--bounds", "100", "--prime-limit", "5000", "--no-timing"
        )
        predicted = res.stdout.splitlines()[1].split(",")[3]
        mantissa = predicted.replace(".", "").replace("-", "").lstrip("0")
        assert len(mantissa) >= 16


class TestSieveCacheFlag:
    def test_cache_created_and_reused(self, tmp_path):
        cache = tmp_path / "sieve.sq4c"
        res1 = run_cli("count", "--kind", "star", "--B", "100", "--cache", str(cache), "--no-timing")
        assert res1.returncode == 0 and cache.exists()
        res2 = run_cli("count", "--kind", "star", "--B", "100", "--cache", str(cache), "--no-timing")
        assert res2.returncode == 0
        assert res1.stdout == res2.stdout

    def test_invalid_cache_rebuilt_with_warning(self, tmp_path):
        cache = tmp_path / "sieve.sq4c"
        cache.write_bytes(b"garbage")
        res = run_cli("count", "--kind", "star", "--B", "100", "--cache", str(cache), "--no-timing")
        assert res.returncode == 0
        assert "warning" in res.stderr.lower()
        assert res.stdout.splitlines()[1].startswith("star,100,")


class TestVerifySuitesEndToEnd:
    def test_oracle_suite(self):
        res = run_cli("verify", "--suite", "oracle")
        assert res.returncode == 0
        assert res.stdout.count("PASS") == 41 and "FAIL" not in res.stdout

    def test_local_suite(self):
        res = run_cli("verify", "--suite", "local")
        assert res.returncode == 0
        assert res.stdout.count("PASS") == 25

    def test_partition_suite(self):
        res = run_cli("verify", "--suite", "partition")
        assert res.returncode == 0
        assert res.stdout.count("PASS") == 40

    def test_global_suite_passes_at_default_tolerance(self):
        res = run_cli("verify", "--suite", "global")
        assert res.returncode == 0
        assert res.stdout.count("PASS") == 2

#!/usr/bin/env python3
"""
Repository Management Script

This script performs the following tasks:
1. Runs the mixedbm selftest (special functions, circle symbols, SSM)
2. Runs Python tests (the slow acceptance runs only with --slow)
3. Runs mypy for type checking
4. Runs black for code formatting
5. Runs isort for import sorting
6. On request, regenerates the frozen oracle list of the default window

Usage:
    ./repo_management.py [options]

Options:
    --selftest         Run the mixedbm selftest only
    --test             Run tests only
    --slow             Include the slow acceptance tests when running tests
    --mypy             Run mypy only
    --black            Run black only
    --isort            Run isort only
    --freeze           Rewrite test/data/eigs_oracle_default.csv (not part of --all)
    --all              Run all tasks (default)
    --help             Show this help message

Example:
    ./repo_management.py --selftest --test --slow
"""

import argparse
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

FROZEN_ORACLE = Path("test") / "data" / "eigs_oracle_default.csv"


def run_selftest(repo_path="."):
    """Run the built-in invariant suite through the command line."""
    print("\n=== Running mixedbm selftest ===")

    try:
        result = subprocess.run(
            [sys.executable, "-m", "mixedbm.cli", "selftest"],
            cwd=repo_path,
            check=False,
            capture_output=True,
            text=True,
        )
        print(result.stdout)
        if result.stderr:
            print(result.stderr, file=sys.stderr)

        if result.returncode == 0:
            print("✅ Selftest passed.")
            return True
        print(f"⚠️ Selftest failed with return code {result.returncode}", file=sys.stderr)
        return False
    except Exception as e:
        print(f"⚠️ Error running selftest: {e}", file=sys.stderr)
        return False


def run_tests(repo_path=".", with_coverage=True, slow=False):
    """Run Python tests using pytest, optionally with coverage."""
    print("\n=== Running Python Tests ===")

    pytest_args = ["-v", "test"]
    if slow:
        # overrides the "not slow" default from pyproject.toml
        pytest_args = ["-v", "-m", "slow or not slow", "test"]

    cmd = ["pytest", *pytest_args]
    if with_coverage:
        cmd = ["coverage", "run", "--source=src", "-m", "pytest", *pytest_args]

    try:
        result = subprocess.run(
            cmd, cwd=repo_path, check=False, capture_output=True, text=True
        )

        print(result.stdout)
        if result.stderr:
            print(result.stderr, file=sys.stderr)

        if result.returncode == 0:
            print("✅ All tests passed.")
            if with_coverage:
                print(
                    "✅ Coverage report generated. Run coverage html && open htmlcov/index.html for details."
                )
            return True
        else:
            print(f"⚠️ Tests failed with return code {result.returncode}", file=sys.stderr)
            return False
    except FileNotFoundError:
        required_packages = "pytest"
        if with_coverage:
            required_packages += ", coverage"

        print(
            f"⚠️ Required packages not found. Please install them with: poetry add --group dev {required_packages}",
            file=sys.stderr,
        )
        return False
    except Exception as e:
        print(f"⚠️ Error running tests: {e}", file=sys.stderr)
        return False


def run_mypy(repo_path="."):
    """Run mypy for type checking."""
    print("\n=== Running Mypy Type Checking ===")

    try:
        result = subprocess.run(
            ["mypy", "src"], cwd=repo_path, check=False, capture_output=True, text=True
        )

        if result.stdout:
            print(result.stdout)
        if result.stderr:
            print(result.stderr, file=sys.stderr)

        if result.returncode == 0:
            print("✅ Mypy type checking passed.")
            return True
        else:
            print(f"⚠️ Mypy found issues with return code {result.returncode}", file=sys.stderr)
            return False
    except FileNotFoundError:
        print("⚠️ mypy not found. Please install it with: pip install mypy", file=sys.stderr)
        return False
    except Exception as e:
        print(f"⚠️ Error running mypy: {e}", file=sys.stderr)
        return False


def _format_with(tool, check_args, apply_args, repo_path):
    check_result = subprocess.run(
        check_args, cwd=repo_path, check=False, capture_output=True, text=True
    )
    if check_result.returncode == 0:
        print(f"✅ Nothing to change for {tool}.")
        return True

    print(f"The following files need {tool}:")
    print(check_result.stdout or check_result.stderr)
    apply_result = subprocess.run(
        apply_args, cwd=repo_path, check=False, capture_output=True, text=True
    )
    if apply_result.returncode == 0:
        print(f"✅ Files rewritten with {tool}.")
        return True
    print(f"⚠️ {tool} failed with return code {apply_result.returncode}", file=sys.stderr)
    print(apply_result.stderr, file=sys.stderr)
    return False


def run_black(repo_path="."):
    """Run black for code formatting."""
    print("\n=== Running Black Code Formatter ===")

    try:
        return _format_with(
            "black",
            ["black", "--check", "src", "test"],
            ["black", "src", "test"],
            repo_path,
        )
    except FileNotFoundError:
        print("⚠️ black not found. Please install it with: pip install black", file=sys.stderr)
        return False
    except Exception as e:
        print(f"⚠️ Error running black: {e}", file=sys.stderr)
        return False


def run_isort(repo_path="."):
    """Run isort for import sorting."""
    print("\n=== Running isort Import Sorter ===")

    try:
        return _format_with(
            "isort",
            ["isort", "--check-only", "--profile", "black", "src", "test"],
            ["isort", "--profile", "black", "src", "test"],
            repo_path,
        )
    except FileNotFoundError:
        print("⚠️ isort not found. Please install it with: pip install isort", file=sys.stderr)
        return False
    except Exception as e:
        print(f"⚠️ Error running isort: {e}", file=sys.stderr)
        return False


def run_freeze(repo_path="."):
    """Regenerate the oracle list of the default window used as regression data."""
    print("\n=== Freezing the default oracle list ===")

    try:
        with tempfile.TemporaryDirectory() as out:
            result = subprocess.run(
                [sys.executable, "-m", "mixedbm.cli", "oracle-eigs", "--no-timestamp", "--out", out],
                cwd=repo_path,
                check=False,
                capture_output=True,
                text=True,
            )
            if result.returncode != 0:
                print(result.stderr, file=sys.stderr)
                print(f"⚠️ oracle-eigs failed with return code {result.returncode}", file=sys.stderr)
                return False
            target = Path(repo_path) / FROZEN_ORACLE
            target.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(Path(out) / "eigs_oracle.csv", target)
        print(f"✅ Wrote {target}. Compare it with the previous copy before committing.")
        return True
    except Exception as e:
        print(f"⚠️ Error freezing the oracle list: {e}", file=sys.stderr)
        return False


def parse_arguments():
    parser = argparse.ArgumentParser(
        description="Repository management script for the selftest, tests and code quality tools.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )

    parser.add_argument("--selftest", action="store_true", help="Run the mixedbm selftest only")
    parser.add_argument("--test", action="store_true", help="Run tests only")
    parser.add_argument("--slow", action="store_true", help="Include slow acceptance tests")
    parser.add_argument("--mypy", action="store_true", help="Run mypy only")
    parser.add_argument("--black", action="store_true", help="Run black only")
    parser.add_argument("--isort", action="store_true", help="Run isort only")
    parser.add_argument("--all", action="store_true", help="Run all tasks (default)")
    parser.add_argument(
        "--freeze", action="store_true", help="Regenerate the frozen oracle list"
    )

    args = parser.parse_args()

    # If no specific tasks are specified, run all
    if not (
        args.selftest
        or args.test
        or args.mypy
        or args.black
        or args.isort
        or args.freeze
        or args.all
    ):
        args.all = True

    return args


def main():
    args = parse_arguments()

    success = True

    if args.freeze:
        success = run_freeze() and success

    if args.selftest or args.all:
        success = run_selftest() and success

    if args.test or args.all:
        success = run_tests(slow=args.slow) and success

    if args.mypy or args.all:
        success = run_mypy() and success

    if args.black or args.all:
        success = run_black() and success

    if args.isort or args.all:
        success = run_isort() and success

    print("\n=== Summary ===")
    if success:
        print("✅ All tasks completed successfully.")
        return 0
    else:
        print("⚠️ Some tasks failed. Check the output for details.", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

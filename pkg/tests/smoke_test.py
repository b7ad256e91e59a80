import subprocess
import sys
from importlib.metadata import entry_points, files, version


def assert_distribution_files() -> None:
    dist_files = files("welfarelens")
    if dist_files is None:
        raise AssertionError(
            "Could not read installed distribution files for welfarelens"
        )

    available = {str(path) for path in dist_files}
    required = {
        "welfarelens/__init__.py",
        "welfarelens/cli.py",
        "welfarelens/curves.py",
        "welfarelens/quadrature.py",
        "welfarelens/welfare.py",
        "welfarelens/py.typed",
    }
    missing = sorted(required - available)
    if missing:
        raise AssertionError(f"Installed distribution is missing files: {missing}")


def assert_console_script() -> None:
    scripts = {ep.name: ep.value for ep in entry_points(group="console_scripts")}
    if scripts.get("welfarelens") != "welfarelens.cli:main":
        raise AssertionError(
            "Console script 'welfarelens' is missing or points to wrong entry point"
        )


def assert_imports() -> None:
    import welfarelens
    from welfarelens import curves, distributions, dominance, exceptions, welfare

    _ = (curves, distributions, dominance, exceptions, welfare)

    installed_version = version("welfarelens")
    if welfarelens.__version__ != installed_version:
        raise AssertionError(
            f"welfarelens.__version__ ({welfarelens.__version__}) "
            f"!= metadata version ({installed_version})"
        )


def assert_cli_help() -> None:
    result = subprocess.run(
        [sys.executable, "-m", "welfarelens", "-h"],
        check=False,
        capture_output=True,
        text=True,
    )

    if result.returncode != 0:
        raise AssertionError(
            "`python -m welfarelens -h` failed: "
            f"exit={result.returncode}, stderr={result.stderr.strip()}"
        )

    help_text = result.stdout.lower()
    if "usage:" not in help_text:
        raise AssertionError("CLI help output did not contain a usage section")
    for command in ("index", "curve", "weights", "welfare", "dominance", "verify"):
        if command not in help_text:
            raise AssertionError(f"CLI help does not list the {command!r} command")


def main() -> None:
    assert_distribution_files()
    assert_console_script()
    assert_imports()
    assert_cli_help()
    print("smoke test passed")


if __name__ == "__main__":
    main()

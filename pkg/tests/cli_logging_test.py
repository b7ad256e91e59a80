"""Logging-behaviour contract for welfarelens.

``cli._configure_logging`` always installs exactly one console handler (Rich,
or a plain stream handler with ``--debug``) on stderr, so stdout carries only
the report. A DEBUG file log is opt-in through ``WELFARELENS_LOG_FILE`` or
``WELFARELENS_LOG_DIR``; a file that cannot be opened costs a warning, never
the run.
"""

import logging
import os
import shutil
import tempfile
from pathlib import Path

from rich.logging import RichHandler

from welfarelens import VERBOSE, cli

_LOG_ENV = ("WELFARELENS_LOG_FILE", "WELFARELENS_LOG_DIR")


class _Restore:
    """Snapshot the root logger and the log env vars; put both back on exit."""

    def __enter__(self) -> None:
        root = logging.getLogger()
        self.handlers = list(root.handlers)
        self.level = root.level
        self.env = {key: os.environ.get(key) for key in _LOG_ENV}
        for key in _LOG_ENV:
            _ = os.environ.pop(key, None)

    def __exit__(self, *exc: object) -> None:
        root = logging.getLogger()
        for handler in list(root.handlers):
            if handler not in self.handlers:
                root.removeHandler(handler)
                handler.close()
        for handler in self.handlers:
            if handler not in root.handlers:
                root.addHandler(handler)
        root.setLevel(self.level)
        for key, value in self.env.items():
            if value is None:
                _ = os.environ.pop(key, None)
            else:
                os.environ[key] = value


def _file_handlers() -> list[logging.FileHandler]:
    handlers = logging.getLogger().handlers
    return [h for h in handlers if isinstance(h, logging.FileHandler)]


def assert_console_handler_per_mode() -> None:
    with _Restore():
        if cli._configure_logging(verbose=False, debug=False) is not None:
            raise AssertionError("no log file unless one is requested")
        (handler,) = logging.getLogger().handlers
        if not isinstance(handler, RichHandler) or handler.level != logging.INFO:
            raise AssertionError(f"default console must be Rich at INFO, got {handler}")
        if _file_handlers():
            raise AssertionError("no file handler by default")

        _ = cli._configure_logging(verbose=True, debug=False)
        (handler,) = logging.getLogger().handlers
        if handler.level != VERBOSE:
            raise AssertionError("-v lowers the console to VERBOSE")

        _ = cli._configure_logging(verbose=False, debug=True)
        (handler,) = logging.getLogger().handlers
        if isinstance(handler, RichHandler) or handler.level != logging.DEBUG:
            raise AssertionError("-d switches to a plain DEBUG stream handler")


def assert_log_file_is_opt_in() -> None:
    with _Restore():
        tmp = Path(tempfile.mkdtemp())
        try:
            os.environ["WELFARELENS_LOG_FILE"] = str(tmp / "nested" / "run.log")
            path = cli._configure_logging(verbose=False, debug=False)
            if path is None or path != tmp / "nested" / "run.log":
                raise AssertionError(f"explicit log file not honoured: {path}")
            if not path.parent.is_dir():
                raise AssertionError("the log directory must be created")
            logging.getLogger("welfarelens.curves").debug("sample record")
            for handler in _file_handlers():
                handler.flush()
            if "sample record" not in path.read_text(encoding="utf-8"):
                raise AssertionError("the file log must capture DEBUG records")

            _ = os.environ.pop("WELFARELENS_LOG_FILE")
            os.environ["WELFARELENS_LOG_DIR"] = str(tmp)
            path = cli._configure_logging(verbose=False, debug=False)
            if path is None or path.parent != tmp or not path.name.endswith(".log"):
                raise AssertionError(f"log dir must hold a timestamped file: {path}")
            if not path.name.startswith("welfarelens-"):
                raise AssertionError(f"log file must be named after the tool: {path}")
        finally:
            for handler in _file_handlers():
                logging.getLogger().removeHandler(handler)
                handler.close()
            shutil.rmtree(tmp, ignore_errors=True)


def assert_unopenable_log_file_is_not_fatal() -> None:
    with _Restore():
        tmp = Path(tempfile.mkdtemp())
        try:
            blocker = tmp / "not-a-dir"
            _ = blocker.write_text("", encoding="utf-8")
            os.environ["WELFARELENS_LOG_FILE"] = str(blocker / "run.log")
            if cli._configure_logging(verbose=False, debug=False) is not None:
                raise AssertionError("an unopenable log file must yield None")
            if _file_handlers():
                raise AssertionError("no file handler may be left behind")
        finally:
            shutil.rmtree(tmp, ignore_errors=True)


def main() -> None:
    assert_console_handler_per_mode()
    assert_log_file_is_opt_in()
    assert_unopenable_log_file_is_not_fatal()
    print("cli logging behaviour test passed")


if __name__ == "__main__":
    main()

"""Pytest collection wiring for the script-style test suite.

The module tests (test/test-*.py) and the acceptance test (test_system.py)
are standalone scripts that exit 0 on success, as run by
test/run-all-tests.py. Each script is collected as one pytest item that runs
it as a subprocess from the project root.
"""

import subprocess
import sys
from pathlib import Path

import pytest

ROOT_DIR = Path(__file__).parent


def pytest_collect_file(parent, file_path):
    is_module_test = file_path.parent == ROOT_DIR / "test" and file_path.name.startswith("test-") \
        and file_path.suffix == ".py"
    is_system_test = file_path == ROOT_DIR / "test_system.py"
    if is_module_test or is_system_test:
        return ScriptFile.from_parent(parent, path=file_path)
    return None


class ScriptFile(pytest.File):
    def collect(self):
        yield ScriptItem.from_parent(self, name=self.path.name)


class ScriptItem(pytest.Item):
    def runtest(self):
        proc = subprocess.run([sys.executable, str(self.path)], cwd=str(ROOT_DIR),
                              capture_output=True, text=True)
        if proc.returncode != 0:
            raise ScriptFailed(proc.returncode, proc.stdout, proc.stderr)

    def repr_failure(self, excinfo):
        if isinstance(excinfo.value, ScriptFailed):
            err = excinfo.value
            return f"{self.path.name} exited with code {err.returncode}\n{err.stdout[-8000:]}\n{err.stderr[-8000:]}"
        return super().repr_failure(excinfo)

    def reportinfo(self):
        return self.path, 0, f"script: {self.path.name}"


class ScriptFailed(Exception):
    def __init__(self, returncode, stdout, stderr):
        super().__init__(returncode)
        self.returncode = returncode
        self.stdout = stdout
        self.stderr = stderr

import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from atominterface.cli import main
from atominterface.config import load_preset

GOLDEN = Path(__file__).parent / "golden"

# criterion number -> {"title": str, "results": [(ok, detail)]}
_ACCEPTANCE: dict[int, dict] = {}


@contextmanager
def _record(number: int, title: str, info: dict):
    entry = _ACCEPTANCE.setdefault(number, {"title": title, "results": []})
    try:
        yield info
    except BaseException as exc:
        entry["results"].append((False, info.get("detail", "") or f"{type(exc).__name__}: {exc}"))
        raise
    else:
        entry["results"].append((True, info.get("detail", "")))


@pytest.fixture
def criterion():
    """``with criterion(n, title) as info: ...``; set ``info["detail"]`` for the summary."""
    def make(number, title):
        return _record(number, title, {})
    return make


@pytest.fixture(scope="session")
def run_preset(tmp_path_factory):
    """Run a bundled preset through the CLI once per (name, threads); returns (paths, seconds)."""
    cache = {}

    def run(name, threads):
        key = (name, threads)
        if key not in cache:
            out_dir = tmp_path_factory.mktemp(f"{name}_t{threads}")
            out = out_dir / load_preset(name).default_output()
            start = time.perf_counter()
            rc = main(["run", "--preset", name, "--out", str(out), "--threads", str(threads)])
            elapsed = time.perf_counter() - start
            assert rc == 0, f"preset {name} exited with {rc}"
            cache[key] = (sorted(p for p in out_dir.iterdir() if p.suffix != ".svg"), elapsed)
        return cache[key]

    return run


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        entry = _ACCEPTANCE[number]
        results = entry["results"]
        ok = all(r[0] for r in results)
        status = "PASS" if ok else "FAIL"
        details = "; ".join(d for _, d in results if d)
        if len(results) > 1:
            details = f"{sum(r[0] for r in results)}/{len(results)} checks" + (
                f"; {details}" if details and not ok else "")
        terminalreporter.write_line(f"[{status}] {number}. {entry['title']}: {details}")

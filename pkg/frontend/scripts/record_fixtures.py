"""Record API fixtures for the workbench test suite.

Builds the demo corpus, runs the backend in-process, and captures one JSON
response per endpoint (plus a successful PUT, a 422 PUT, and a refit) under
frontend/fixtures/. Deterministic: same package version -> same bytes.

Usage: python3 scripts/record_fixtures.py
"""

import json
import pathlib
import sys
import tempfile

from fastapi.testclient import TestClient

from labelforge.cli import RunConfig, main
from labelforge.server import build_state, create_app

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def dump(name: str, payload) -> None:
    FIXTURES.mkdir(exist_ok=True)
    path = FIXTURES / f"{name}.json"
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {path}")


def record() -> int:
    tmp = pathlib.Path(tempfile.mkdtemp())
    if main(["demo", "--out", str(tmp), "--n", "200", "--seed", "1"]) != 0:
        return 1
    values = json.loads((tmp / "config.json").read_text(encoding="utf-8"))
    client = TestClient(create_app(build_state(RunConfig(values=values, base_dir=tmp))))

    for name, path in [
        ("health", "/api/health"),
        ("corpus_summary", "/api/corpus/summary"),
        ("lfs", "/api/lfs"),
        ("matrix_stats", "/api/matrix/stats"),
        ("dev_metrics", "/api/dev/metrics"),
        ("labels", "/api/labels"),
        ("model", "/api/model"),
        ("report", "/api/report"),
    ]:
        response = client.get(path)
        assert response.status_code == 200, (path, response.status_code)
        dump(name, response.json())

    original = (tmp / "lfs.json").read_text(encoding="utf-8")
    edited = json.loads(original)
    edited["lfs"][0]["rule"] = {"prefix_word": "pneumonia"}
    response = client.put("/api/lfs", content=json.dumps(edited))
    assert response.status_code == 200, response.text
    dump("put_lfs_ok", response.json())
    response = client.put("/api/lfs", content=original)  # restore
    assert response.status_code == 200, response.text

    response = client.put(
        "/api/lfs",
        content=json.dumps(
            {"lfs": [{"name": "lf_bad", "emit": 1, "rule": {"regex": "["}}]}
        ),
    )
    assert response.status_code == 422, response.text
    dump("put_lfs_invalid", response.json())

    response = client.post("/api/fit", content=json.dumps({}))
    assert response.status_code == 200, response.text
    dump("fit_ok", response.json())
    return 0


if __name__ == "__main__":
    sys.exit(record())

import json

from maskforge.bench import COLUMNS, BenchReport, BenchRow, bench, default_suite, suite_files, write_report
from maskforge.pipeline import SynthConfig


def test_empty_suite_gives_empty_report(tmp_path):
    report = bench(tmp_path, orders=(1, 2))
    assert report.rows == []
    written = write_report(report, tmp_path / "out")
    assert [p.name for p in written] == ["bench.json", "bench.tsv", "bench.txt"]


def test_bundled_suite_at_two_orders(tmp_path):
    names = {p.stem for p in suite_files(default_suite())}
    assert names == {"fig2", "identity", "and"}
    report = bench(default_suite(), orders=(1, 2), cfg=SynthConfig(mono_timeout=5.0))
    assert len(report.rows) == 6
    assert all(r.status == "ok" for r in report.rows), report.to_text()
    fig2 = next(r for r in report.rows if r.name == "fig2" and r.order == 2)
    assert fig2.rds >= 4
    for r in report.rows:
        assert r.mtc <= r.time and r.size is not None
    written = write_report(report, tmp_path)
    assert {p.suffix for p in written} == {".json", ".tsv", ".txt", ".png"}
    data = json.loads((tmp_path / "bench.json").read_text())
    assert data["columns"] == list(COLUMNS) and len(data["rows"]) == 6


def test_broken_file_becomes_an_error_row(tmp_path):
    (tmp_path / "bad.mfc").write_text("circuit bad\n node\n")
    report = bench(tmp_path, orders=(1,))
    assert len(report.rows) == 1 and report.rows[0].status.startswith("error")


def test_text_table_is_aligned():
    r = BenchReport([BenchRow("a", 1, 1.5, 0.5, 10, 2), BenchRow("longer", 2, status="error: x")])
    lines = r.to_text().splitlines()
    assert lines[0].split() == list(COLUMNS)
    assert "-" in lines[3]
    assert r.to_tsv().splitlines()[1].split("\t") == ["a", "1", "1.50", "0.50", "10", "2", "ok"]

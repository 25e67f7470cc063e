from pathlib import Path

import example_session


def test_example_session_runs(monkeypatch, capsys):
    monkeypatch.chdir(Path(example_session.__file__).parent)
    example_session.main()
    out = capsys.readouterr().out
    assert "born_engine - Example Session" in out
    assert '"method": "Continuity"' in out
    assert out.count("chi_square,") == 4

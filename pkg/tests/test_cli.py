import socket

import pytest

from conftest import CORPUS_PATH, make_clock
from synthlab.cli import build_parser, main, parse_listen, preload_fixture
from synthlab.errors import BindError
from synthlab.service import ServiceConfig, SessionManager


def test_parse_listen_valid():
    assert parse_listen("127.0.0.1:8787") == ("127.0.0.1", 8787)
    assert parse_listen("0.0.0.0:80") == ("0.0.0.0", 80)


@pytest.mark.parametrize(
    "value",
    ["8787", ":8787", "127.0.0.1:", "127.0.0.1:http", "127.0.0.1:0", "127.0.0.1:70000"],
)
def test_parse_listen_rejects(value):
    with pytest.raises(BindError):
        parse_listen(value)


def test_parser_env_defaults(monkeypatch):
    monkeypatch.setenv("SYNTHLAB_LISTEN", "0.0.0.0:9000")
    monkeypatch.setenv("SYNTHLAB_DATA_DIR", "/tmp/elsewhere")
    args = build_parser().parse_args([])
    assert args.listen == "0.0.0.0:9000"
    assert args.data_dir == "/tmp/elsewhere"
    args = build_parser().parse_args(["--listen", "127.0.0.1:1234"])
    assert args.listen == "127.0.0.1:1234"


def test_preload_fixture_first_boot_only(tmp_path):
    config = ServiceConfig(data_dir=tmp_path / "data")
    manager = SessionManager(config, clock=make_clock())
    sid = preload_fixture(manager, str(CORPUS_PATH))
    assert sid == "ses-000001"
    assert len(manager.sessions[sid].annotations) == 12
    assert preload_fixture(manager, str(CORPUS_PATH)) is None
    assert list(manager.sessions) == [sid]
    manager.close()

    # a restart sees the existing session and also skips the preload
    again = SessionManager(config, clock=make_clock("2026-04-02"))
    assert preload_fixture(again, str(CORPUS_PATH)) is None
    again.close()


def test_main_rejects_bad_listen(tmp_path, capsys):
    assert main(["--listen", "nope", "--data-dir", str(tmp_path / "d")]) == 2
    assert "synthlab:" in capsys.readouterr().err


def test_main_rejects_bad_data_dir(tmp_path, capsys):
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory")
    assert main(["--data-dir", str(blocker)]) == 2
    assert "synthlab:" in capsys.readouterr().err


def test_main_rejects_bad_snapshot_every(tmp_path, capsys):
    assert main(["--data-dir", str(tmp_path / "d"), "--snapshot-every", "0"]) == 2
    assert "snapshot_every" in capsys.readouterr().err


def test_main_rejects_missing_fixture(tmp_path, capsys):
    rc = main(["--data-dir", str(tmp_path / "d"), "--fixture", "/nope/void.json"])
    assert rc == 2
    assert "synthlab:" in capsys.readouterr().err


def test_main_rejects_occupied_port(tmp_path, capsys):
    holder = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        holder.bind(("127.0.0.1", 0))
        holder.listen(1)
        port = holder.getsockname()[1]
        rc = main(["--listen", f"127.0.0.1:{port}", "--data-dir", str(tmp_path / "d")])
        assert rc == 2
        assert "cannot bind" in capsys.readouterr().err
    finally:
        holder.close()

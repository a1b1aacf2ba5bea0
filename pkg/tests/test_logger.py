import json
import logging
from fractions import Fraction

from config import Settings, get_settings
from eps_field.field import EpsPoly
from utils.logger import get_logger, get_run_logger, setup_logging


def test_log_lines_are_json_with_exact_values(tmp_path):
    log_file = tmp_path / "logs" / "qpe.log"
    setup_logging(get_settings().model_copy(update={"log_level": "INFO", "log_file": str(log_file)}))
    try:
        get_run_logger("solve2p", "abc123").info("lcp solved", value=Fraction(1, 3), rhs=EpsPoly([1, -1]))
        get_logger("quiet").debug("below level")
        for handler in logging.getLogger().handlers:
            handler.flush()
        lines = [json.loads(line) for line in log_file.read_text(encoding="utf-8").splitlines()]
    finally:
        setup_logging(get_settings().model_copy(update={"log_level": "WARNING", "log_file": None}))
    assert len(lines) == 1
    event = lines[0]
    assert event["event"] == "lcp solved"
    assert event["run_id"] == "abc123"
    assert event["logger"] == "run.solve2p"
    assert event["value"] == "1/3"
    assert event["rhs"] == str(EpsPoly([1, -1]))


def test_log_size_accepts_units():
    assert Settings(log_max_size="1KiB").log_max_size == 1024
    assert int(Settings().log_max_size) == 10 * 1024 * 1024

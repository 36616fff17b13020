import numpy as np
import pytest

from telesim.errors import ParseError, UnsupportedVersionError, ContractViolationError
from telesim.logs import LogSample, TrialLog, decode_log, encode_log, make_event, record_log, replay_log
from telesim.tasks import Outcome, COMPLETED


def sample(t, force=(0.0, 0.0, 0.0), stage="fine"):
    return LogSample(
        t=t,
        q_f=(0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7),
        dq_f=(0.0,) * 7,
        x_f_translation=(0.4, 0.0, 0.3),
        x_f_rotation=(1.0, 0.0, 0.0, 0.0),
        f_ext_force=tuple(map(float, force)),
        f_ext_torque=(0.0, 0.0, 0.0),
        effector="idle",
        stage=stage,
    )


def make_log():
    log = TrialLog(
        trial_id="trial-1",
        platform="haptic",
        task="unbolting",
        scenario="case1-unbolting",
        coupling_profile="haptic-cartesian",
        rate_hz=1000.0,
        sample_rate_hz=100.0,
        seed=42,
    )
    log.samples = [sample(0.01 * k, force=(0.0, 0.0, 0.5 * k)) for k in range(20)]
    log.events = [make_event(0.05, "spindle_on"), make_event(0.15, "spindle_off")]
    log.outcome = Outcome(True, COMPLETED, 0.19)
    log.counters = {"dropped_commands": 0}
    log.ended = True
    return log


def test_round_trip_equality():
    log = make_log()
    back = decode_log(encode_log(log))
    assert back == log


def test_record_replay_file(tmp_path):
    log = make_log()
    path = tmp_path / "trial.jsonl"
    record_log(log, path)
    back = replay_log(path)
    assert back == log
    # encoding of a replayed log is byte-identical
    assert encode_log(back) == encode_log(log)


def test_encoding_deterministic():
    assert encode_log(make_log()) == encode_log(make_log())


def test_version_gate(tmp_path):
    log = make_log()
    data = encode_log(log).decode()
    data = data.replace('"format_version":1', '"format_version":99', 1)
    path = tmp_path / "future.jsonl"
    path.write_text(data)
    with pytest.raises(UnsupportedVersionError):
        replay_log(path)


def test_truncated_record_parse_error():
    data = encode_log(make_log())
    cut = data[: len(data) - 30]  # chop inside the final record
    with pytest.raises(ParseError) as info:
        decode_log(cut)
    assert info.value.offset > 0


def test_record_before_header_rejected():
    with pytest.raises(ParseError):
        decode_log(b'{"type":"sample","t":0.0}\n')


def test_validate_ordering():
    log = make_log()
    log.samples = [sample(0.1), sample(0.05)]
    with pytest.raises(ContractViolationError):
        log.validate()


def test_validate_event_bounds():
    log = make_log()
    log.events = [make_event(99.0, "spindle_on")]
    with pytest.raises(ContractViolationError):
        log.validate()


def test_validate_outcome_presence():
    log = make_log()
    log.outcome = None
    with pytest.raises(ContractViolationError):
        log.validate()
    fresh = TrialLog(trial_id="x", platform="twin", task="cutting")
    fresh.samples = [sample(0.0), sample(0.5)]
    fresh.outcome = Outcome(True, COMPLETED, 0.5)
    with pytest.raises(ContractViolationError):
        fresh.validate()

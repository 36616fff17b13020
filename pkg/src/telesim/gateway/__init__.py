from .loop import STALE_HOLD_S, run_trial
from .operator import OperatorScript, RemoteOperator, ScriptedOperator, Waypoint
from .protocol import (
    GRIP,
    PROTOCOL_VERSION,
    RELEASE,
    SPINDLE,
    SUCTION,
    EffectorCommand,
    MasterCommand,
    SlaveFrame,
    ack_record,
    control_record,
    decode_command,
    decode_frame,
    encode_command,
    encode_frame,
    error_record,
    event_record,
    hello_record,
)
from .scripts import (
    first_grasp_miss_script,
    force_limit_failure_script,
    grasp_loss_failure_script,
    incomplete_cut_failure_script,
    nominal_script,
    path_deviation_failure_script,
    suction_tilt_failure_script,
)

__all__ = [name for name in dir() if not name.startswith("_")]

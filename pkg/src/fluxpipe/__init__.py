"""Compile, check and simulate pipelined surface-code QEC cycles on flux-tunable transmons."""

__version__ = "0.1.0"

from .errors import (DegenerateLadder, FluxPipeError, InjectionOutOfRange, InvalidPatch,
                     InvalidTarget, LadderMismatch, MisalignedAnchor, OrderViolation,
                     OutOfPatch, OutOfRange, TooLarge, UnassignedQubit, UnsupportedSchedule)
from .fabric import Fabric, PatchSpec, Plaquette, build_fabric, role_of, unit_cell_census
from .freqplan import (FrequencyLadder, InteractionZoneReport, build_ladder, check_static,
                       check_transition, required_detuning, residual_error)
from .schedule import (CycleSchedule, Durations, GateOp, ancilla_depth, cycle_time,
                       parallel_cycle, parallel_cycle_s17, pipelined_cycle, validate_ordering)
from .pulsemask import (LogicalEdit, MaskTable, apply_edit, masks_to_sequences,
                        primitive_count, synthesize_masks)
from .cliffsim import (ErrorInjection, PauliFrame, StabilizerState, SyndromeRecord,
                       distance_check, logical_operator_check, run_cycles,
                       verify_stabilizer_projection)

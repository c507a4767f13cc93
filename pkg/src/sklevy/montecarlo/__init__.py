"""Path simulation of the subordinate killed process and its estimators."""
from .estimators import (Ball, CellGrid, McEstimate, OccupationResult, PathConfig, PathRecord,
                         counterexample_mc, estimate_harmonic, estimate_lifetime,
                         estimate_occupation_green, estimate_survival, run_y, run_z,
                         simulate_yd_path, z_score)
from .rng import RngStream, key_of, run_chunks
from .stable import sample_stable_increment, step_subordinate_bm

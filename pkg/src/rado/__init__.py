"""Disjoint subcollections of boxes and balls: selectors, an exact oracle,
extremal constructions and numeric density bounds."""

from .errors import (CertificateError, DimensionMismatch, InputError, KindError, RadoError,
                     ResourceLimitError)
from .geometry import (BALL, BOX, ROTRECT, Body, Collection, VolumeEstimate, ball, box, from_balls,
                       from_boxes, intersects, load_collection, rotrect, save_collection, union_volume,
                       union_volume_boxes, union_volume_mc, volume)
from .oracle import OracleResult, delta, independence_number, max_disjoint_volume
from .selectors import (ALGORITHMS, MultiscaleParams, SelectionResult, run_selector, select_blichfeldt,
                        select_boundary_sweep, select_multiscale, select_nordlander, select_rado_intervals,
                        select_vitali_greedy, select_zalgaller, snap_to_grid)
from .constructions import (AjtaiReport, ajtai_almost_counterexample, ball_net, compose_ajtai, four_squares,
                            pinwheel, translate_net, verify_almost_counterexample)
from .bounds import bound_value, bounds_table, kl_upper_optimize

__version__ = "0.1.0"

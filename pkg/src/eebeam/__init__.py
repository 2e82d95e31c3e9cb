"""Energy-efficient coordinated beamforming and power allocation for
multicell multiuser MISO downlink systems."""

from .model import (SystemConfig, ChannelSet, BeamformerSet, ReceiverFilters,
                    AuxWeights, interference, user_rate, mse, mmse,
                    total_power, consumed_power, energy_efficiency,
                    surrogate_G, surrogate_H)
from .channel import (GeometryConfig, DropRealization, pathloss_db, drop_users,
                      generate_channels, save_channels, load_channels)
from .inner import (InnerOptions, InnerReport, inner_solve, update_receivers,
                    update_weights, build_A, beamformer_at_lambda,
                    power_of_lambda, solve_lambda)
from .outer import (OuterOptions, SolveReport, eta_upper_bound, evaluate_F,
                    outer_solve)
from .baselines import (FixedBeamDirections, mrt_directions, random_directions,
                        wmmse_sum_rate, ee_power_allocation)
from .parsim import Message, ProtocolTrace, run_parallel, count_overhead
from .harness import (FlopEstimate, ExperimentSpec, estimate_flops,
                      convert_units, run_experiment, write_results)
from .errors import (EebeamError, ValidationError, SingularMatrixError,
                     DegenerateConfigError, ConfigError, NonConvergenceError,
                     ProtocolError)

__version__ = "0.1.0"

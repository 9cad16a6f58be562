"""Family sizes in the duplication model: simulation, stick-breaking limits and Mittag-Leffler laws."""

__version__ = "0.1.0"

from .sim_core import (CoupledRun, FamilyCensus, ModelParams, TypeAssignment, census, max_coupling_gap,
                       simulate_coupled, simulate_duplication, tail_count)
from .qrn import StickSequence, expected_Y, sample_qrn, sample_qrn_sparse
from .limit_laws import (g_of_S, ml_cdf, ml_density, ml_moment, sample_ml, sample_stable, tail_constants,
                         z_moment)
from .partitions import (CRPParams, SetPartition, bell_number, dup_partition_prob, enumerate_partitions,
                         ewens_prob, pd_stick_sample, polya_sequence_prob, simulate_crp)
from .experiments import (fit_loglog_slope, ks_statistic, run_coupling_experiment, run_largest_family_experiment,
                          run_tail_decay_experiment, run_tail_experiment)

"""Bounds on MSE and PCC between objective quality estimators and MOS."""

from .bounds import (
    BoundInputs,
    BoundReport,
    binovotes_bounds,
    bound_curves,
    mse_lower_bound,
    pcc_upper_bound_from_mosvar,
    pcc_upper_bound_from_qualityvar,
)
from .estimate import (
    FileRecord,
    MosDataset,
    SampleStats,
    TestSummary,
    binovotes_vote_variance,
    estimate_bounds,
    global_average_vote_variance,
    observed_vote_variance,
    quality_variance_estimate,
    range_coverage_check,
    sample_stats,
)
from .ingest import fixtures, load_dataset, load_mos, load_votes, write_mos, write_votes
from .model import BinoMosPmf, BinoVotes
from .quality import EmpiricalMoments, PointMass, ScaledBeta, Triangular, Uniform, parse_distribution
from .scale import MOS_SCALE, MosLattice, RatingScale, make_scale, mos_lattice, nearest_lattice_error
from .simulate import SimConfig, SimOutcome, convergence_experiment, run_simulation, synth_dataset

__version__ = "0.1.0"

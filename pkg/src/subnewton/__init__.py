"""Matrix-free sub-sampled Newton-CG for L2-regularized softmax
classification, with first-order baselines and a benchmark harness."""

from .bench import (
    ExperimentSpec,
    SolverRun,
    SweepEntry,
    classify_sweep,
    estimate_lipschitz,
    run_experiment,
    sensitivity_sweep,
)
from .cg import CgConfig, CgReport, cg_solve
from .dataset import (
    DesignMatrix,
    LabeledDataset,
    load_csv,
    load_libsvm,
    normalize_columns,
    save_libsvm,
    train_test_split,
)
from .errors import (
    CurvatureError,
    DataError,
    DimensionError,
    LineSearchError,
    ParseError,
    SubnewtonError,
)
from .firstorder import FirstOrderConfig, OptimizerState, lr_grid, run_epochs, step
from .linesearch import LineSearchConfig, line_search
from .newton import NewtonConfig, make_variant, newton_solve
from .sampling import SampleConfig, SubsampledOracle, draw_samples
from .softmax import (
    HessianOperator,
    RowStats,
    SoftmaxProblem,
    accuracy,
    class_probabilities,
    gradient,
    hess_vec,
    load_weights,
    objective,
    predict,
    row_stats,
    save_weights,
)
from .trace import RunRecord, SolveTrace, read_trace_csv, write_trace_csv

__version__ = "0.1.0"

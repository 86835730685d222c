"""Simulation lab for semi-supervised learning on symmetric Gaussian mixtures.

Data model: X | Y ~ N(Y * theta_star, I_d) with Y uniform on {-1, +1}.
The subpackages split along the natural seams: `gmm` holds the model,
samplers, and error metrics; `estimators` the supervised/unsupervised/
semi-supervised fitting routines; `theory` closed-form rates and regime
classification; `experiments` the replicated sweep harness; `data_io` CSV
ingest and result serialization; `charts` SVG rendering; `cli` the
command-line entry point.
"""

__version__ = "0.1.0"

from .gmm import (  # noqa: F401
    LabeledDataset,
    MixtureModel,
    UnlabeledDataset,
    estimation_error,
    excess_risk,
    prediction_error,
    sample_labeled,
    sample_unlabeled,
    std_normal_cdf,
)

"""Synthetic unit quaternion time series generation and evaluation."""

from .copula import GaussianCopulaSynthesizer, fit_copula, sample_copula
from .demo import generate_demo_sample
from .functional import MfpcaModel, QtsFPCA, fit_splines, mfpca, project_scores, reconstruct_qts
from .metrics import evaluate, hidden_rate, knn_graph, knng_frobenius, ks_complement, local_cloaking, \
    rv_coefficient, statistic_similarity
from .quaternion import center_sample, frechet_mean, geodesic_distance, quat_exp, quat_log, sign_align
from .sample import QtsSample
from .synthesis import AvatarSynthesizer, SynGait, SynthesisConfig, TuningGrid, syngait, tune_hyperparameters

__version__ = "0.1.0"

"""Fingerprint forgery detection with adaptive thresholding patterns.

The pipeline diffuses a grayscale fingerprint anisotropically, splits
the result into three Haar wavelet levels, turns ten of the subbands
into adaptive-threshold pattern images, and classifies the concatenated
features with a linear soft-margin SVM.  A harness evaluates robustness
under pixel missing, block missing, and additive Gaussian noise.
"""

__version__ = "0.1.0"

from .atp import ThresholdTable, atp_transform, default_threshold_table, derive_thresholds
from .diffusion import DiffusionParams, diffuse, diffuse_step
from .distortions import Awgn, BlockMissing, PixelMissing, awgn, block_missing, pixel_missing
from .image import load_image, resize_to, save_image
from .metrics import ConfusionMatrix, Scores, confusion, scores
from .pipeline import FeatureVector, extract_features, feature_length
from .svm import SvmModel, predict, train
from .synth import SynthSpec, generate
from .wavelet import SubbandSet, decompose3, haar_dwt2, haar_idwt2

__all__ = [
    "Awgn",
    "BlockMissing",
    "ConfusionMatrix",
    "DiffusionParams",
    "FeatureVector",
    "PixelMissing",
    "Scores",
    "SubbandSet",
    "SvmModel",
    "SynthSpec",
    "ThresholdTable",
    "atp_transform",
    "awgn",
    "block_missing",
    "confusion",
    "decompose3",
    "default_threshold_table",
    "derive_thresholds",
    "diffuse",
    "diffuse_step",
    "extract_features",
    "feature_length",
    "generate",
    "haar_dwt2",
    "haar_idwt2",
    "load_image",
    "pixel_missing",
    "predict",
    "resize_to",
    "save_image",
    "scores",
    "train",
    "__version__",
]

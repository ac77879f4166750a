"""eqrep: predict the five parametric-EQ band gains applied to a sound.

Pipeline: synthesize a note corpus, EQ it over systematic gain grids,
extract a 17-dim timbral feature vector, and train models (linear, random
forest, MLP) that invert the features back to the gains in dB.
"""

from .audio import AudioBuffer, NoteSpec, note_corpus, read_wav, synthesize_note, write_wav
from .eq import (BAND_NAMES, BiquadCoeffs, EqBandSpec, apply_biquad, apply_eq,
                 design_biquad, eq_response, standard_bands)
from .features import FEATURE_NAMES, FeatureVector, StftConfig, extract_features
from .dataset import (COARSE_GRID, FINE_GRID, build_dataset, interpolation_split,
                      load_manifest, multi_band_settings, save_manifest,
                      single_band_settings, split)
from .models import (ForestModel, LinearModel, MlpModel, TrainConfig, load_model,
                     predict, save_model, train_forest, train_linear, train_mlp)
from .evaluate import (EvalReport, experiment_interpolation, experiment_multi_band,
                       experiment_single_band_coarse, experiment_single_band_fine,
                       mse, scatter_export)

__version__ = "0.1.0"

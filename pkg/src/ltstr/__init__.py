"""Long-tail scene-text-recognition toolkit: char F1, expert ensembling, synthetic data."""
from .alignment import align, edit_distance
from .charset import EOS, PAD, UNK, CategoryThresholds, CharCategory, Charset, CountMode
from .ensemble import Prediction, confidence_score, sequence_probability, word_level_ensemble
from .metrics import char_f1, evaluate, word_accuracy

__version__ = "0.1.0"

__all__ = [
    "align", "edit_distance", "EOS", "PAD", "UNK", "CategoryThresholds", "CharCategory",
    "Charset", "CountMode", "Prediction", "confidence_score", "sequence_probability",
    "word_level_ensemble", "char_f1", "evaluate", "word_accuracy",
]

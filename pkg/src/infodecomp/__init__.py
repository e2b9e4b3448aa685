"""Latent periodicity detection by information decomposition of symbolic sequences."""

from .core import (
    Alphabet,
    EncodedSequence,
    MutationSpec,
    SequenceError,
    encode_text,
    generate_periodic,
    generate_random,
    mutate,
    periodic_from_string,
)
from .fourier import PowerSpectrum, fourier_spectrum
from .infostat import (
    BackgroundModel,
    ContingencyMatrix,
    DegenerateBackground,
    InfoStat,
    build_contingency,
    chi2_reference,
    mutual_information,
    sample_background,
    z_score,
)
from .scan import IdSpectrum, PeriodType, ScanHit, best_subsequence, period_type, scan, spectrum

__version__ = "0.1.0"

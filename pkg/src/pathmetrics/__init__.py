"""Reference-free, reference-text and reference-audio intelligibility
metrics for pathological speech, plus a benchmark evaluation harness."""

from .config import Config
from .corpus import (
    Corpus,
    Lexicon,
    ManifestError,
    ProtocolSpec,
    UtteranceRecord,
    VocabSpec,
    content_key,
    load_manifest,
    match_parallel,
)
from .ctc import (
    AlignmentInfeasible,
    AlignmentPath,
    Hypothesis,
    PosteriorMatrix,
    articulatory_precision,
    beam_search_decode,
    collapse_path,
    force_align,
    greedy_decode,
)
from .dsp import (
    AudioBuffer,
    FormantTrack,
    PitchContour,
    cpp,
    estimate_formants,
    f0_semitone_std,
    resample_to_16k,
    speech_rate,
    track_pitch,
    trim_silence,
    vsa,
    wada_snr,
)
from .harness import (
    METRIC_NAMES,
    MetricReport,
    ScoringSession,
    SpeakerScore,
    aggregate_speaker,
    compare_protocols,
    pearson,
    run_protocol,
    wilcoxon_signed_rank,
)
from .lm import NGramModel, parse_arpa
from .metrics import (
    POLARITY,
    UtteranceScore,
    artp,
    asric,
    confidence,
    dartp,
    nad,
    p_estoi,
    per,
    per_phone,
    per_sem,
)
from .tensorfile import Tensor2D, TensorFormatError, read_tensor, write_tensor

__version__ = "0.1.0"

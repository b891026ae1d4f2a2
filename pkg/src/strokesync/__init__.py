"""strokesync: speech-synchronized whiteboard lesson toolkit.

Parses Excalidraw scenes and word-timestamped transcripts, aligns drawing
elements to speech with 1D DTW, serializes elements through a canonical
token grammar, replays predictor output autoregressively onto a canvas,
and evaluates predicted lessons with temporal, geometric and type metrics
under topic-stratified cross-validation.
"""

from .align import (
    AlignedElement,
    WarpPath,
    align_demo,
    dtw_align,
    emit_aligned,
    load_aligned,
    normalize_times,
)
from .errors import StrokeSyncError
from .evaluation import (
    EvalReport,
    FoldSplit,
    chamfer,
    corpus_stats,
    element_points,
    evaluate_lesson,
    make_folds,
    match_elements,
    tae,
    type_accuracy,
)
from .raster import RasterFrame, Viewport, draw_element, fit_viewport, render
from .rollout import (
    PredictedLesson,
    RolloutConfig,
    baseline_uniform_onset,
    oracle_predictor,
    replay_to_excalidraw,
    run_rollout,
    stub_predictor,
)
from .scene import (
    Element,
    ElementType,
    Scene,
    append_element,
    parse_scene,
    parse_scene_file,
    scene_bounds,
    scene_to_excalidraw,
)
from .serial import END_TOKEN, decode_element, encode_element, is_end_token
from .synth import SynthSpec, generate_corpus
from .transcript import Transcript, Word, context_window, parse_transcript

__version__ = "0.1.0"

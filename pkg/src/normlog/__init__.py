"""Norm monitoring with past/future branching temporal logic."""
from .syntax import ParseError, parse, parse_path_formula, parse_state_formula, render
from .model import Model, ModelError, build_model, linear_model, load_model, load_model_file
from .evaluator import Evaluator, eval_path, eval_state, eval_stit
from .model import count_on_path
from .norms import NormError, NormSpec, derive_annotations, expand_norm, holds_norm, load_norms

__version__ = "0.1.0"

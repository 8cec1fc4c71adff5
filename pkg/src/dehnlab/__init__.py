"""Exact and geometric machinery for filling words in SL(p;Z)."""

from .core import (D, E, S, BlockPartition, IntegerMatrix, Letter, Word, evaluate,
                   in_block_group, minimal_parabolic, norm2, norm_inf, parse_word,
                   format_word)
from .shortcuts import build_shortcut, lambda_expand, shortcut_length
from .moves import (DEFAULT_MODEL, CostModel, FillingCertificate, MacroMove, Session,
                    apply_move, verify_certificate)
from .normal import normal_form, omega, omega_triangle
from .rewrite import commute_disjoint, fill_rank2, fill_triangular, parabolic_split
from .symspace import point_of, siegel_reduce, short_vector_space, parabolic_witness
from .mesh import adaptive_mesh, audit_mesh
from .templates import (ClassificationFailed, build_template, fill_parabolic_word,
                        fill_template, fill_word)
from .oracle import steinberg_oracle_fill
from .experiments import ExperimentManifest, fit_growth, run_suite

__version__ = "0.1.0"

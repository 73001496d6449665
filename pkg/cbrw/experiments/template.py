"""
Configuration templates for the experiments.

Generates starter experiment YAML files at one of two scales. Desk-scale
templates finish in minutes and note the acceptance value next to each
setting; acceptance-scale templates carry the ranges, sample counts and set
sizes the acceptance criteria are stated at.
"""

from __future__ import annotations

import yaml

from cbrw.experiments.config import (
    ACCEPTANCE_SAMPLES,
    EXPERIMENT_KINDS,
    SCALES,
    ConfigError,
    ExperimentConfig,
    parse_config,
)

DESCRIPTIONS = {
    "mt1": "Decay of p(x), its BCap plateau, and first-visit frequencies against G_r",
    "qr": "Generating-function identities, r/p against sigma^2/2, and the decay of q",
    "mt2": "Monotonicity and subadditivity of BCap, growth on balls and segments",
    "bd-finite": "Two-sided bound p_A(x) dist(x, A)^{d-2} / BCap(A) over random (x, A)",
    "mt5": "BCap ratios under two offspring laws against the domination constant",
    "halfline": "Half-line recursion: sup x^2 p(x) finite and flat",
    "entering": "Entering measures conditioned on a visit converge to hm_K",
    "reduction": "Degenerate offspring law: BCap equals classical capacity",
    "green-ratio": "First-visit identities and G_r against the free Green function",
}

_LAWS = {
    "halfline": ("1", "binary", "pm1"),
    "reduction": ("5", "delta1", "srw"),
}

DESK_SAMPLES = 20_000

# box radius per kind; kinds not listed size their own boxes from margins
_BOX_RADIUS = {
    "desk": {},
    "acceptance": {"mt1": 32, "qr": 32, "green-ratio": 32, "reduction": 12, "entering": 12},
}

_TARGETS = {
    "desk": {"mt1": "kind: points\n  points:\n    - [0, 0, 0, 0, 0]\n    - [1, 0, 0, 0, 0]"},
    "acceptance": {},
}

_PARAMS = {
    "desk": {
        "mt1": """\
  fit_range: [3.0, 7.0]         # acceptance: [6.0, 24.0] with target origin
  plateau_range: [5.0, 7.0]     # acceptance: [16.0, 24.0]
  key_set: [[0], [1], [0, 1]]   # padded with zeros to the dimension""",
        "qr": """\
  ratio_norm: 5.0               # acceptance: 20.0
  q_range: [3.0, 7.0]           # acceptance: [8.0, 16.0]""",
        "mt2": """\
  set_ball_radius: 2.0          # random sets are drawn from this ball; acceptance: 5.0
  pairs: 4                      # acceptance: 50
  max_set_size: 6
  set_margin: 3
  radii: [1, 2, 3, 4]           # acceptance: [4, 8, 16, 32]
  ball_margin: 3
  slabs: true
  slab_dimension: 6
  slab_radii: [1, 2, 3, 4]      # acceptance: [4, 8, 16, 32]
  slab_margin: 2""",
        "bd-finite": """\
  set_ball_radius: 2.0
  sets: 3                       # sets x sites_per_set pairs; acceptance: 6 x 5
  sites_per_set: 4
  max_set_size: 6
  site_reach: 5                 # acceptance: 8
  margin: 3""",
        "mt5": """\
  compare_offspring: geometric
  # compare_jump: lazy-srw      # exploratory ratio column, never checked
  ball_radii: [1, 2]
  sets: 5                       # acceptance: 10
  set_ball_radius: 2.0
  max_set_size: 6
  margin: 3""",
        "halfline": """\
  xmax: 256                     # acceptance: 4096
  generations: 100000
  sup_range: [8, 128]
  flat_range: [32, 128]
  x_check: 2048""",
        "entering": """\
  entering_set: [[0], [2]]
  norms: [3, 4, 6]              # acceptance: [8, 16, 32]
  min_accepted: 200             # acceptance: 1000
  margin: 6
  # hm_samples: 20000           # defaults to monte_carlo.n_samples
  with_range: false""",
        "reduction": """\
  sets:
    - [[0, 0, 0, 0, 0]]
    - [[0, 0, 0, 0, 0], [1, 0, 0, 0, 0]]
    - [[0, 0, 0, 0, 0], [1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0], [2, 1, 0, 0, 0]]""",
        "green-ratio": """\
  identity_radius: 3            # acceptance: 6
  identity_method: direct
  far_norm: 4.0                 # acceptance: 20.0""",
    },
    "acceptance": {
        "mt1": """\
  fit_range: [6.0, 24.0]
  plateau_range: [16.0, 24.0]
  key_set: [[0], [1], [0, 1]]   # padded with zeros to the dimension""",
        "qr": """\
  ratio_norm: 20.0
  q_range: [8.0, 16.0]""",
        "mt2": """\
  set_ball_radius: 5.0          # random sets are drawn from this ball
  pairs: 50
  max_set_size: 6
  set_margin: 3
  radii: [4, 8, 16, 32]
  ball_margin: 3
  slabs: true
  slab_dimension: 6
  slab_radii: [4, 8, 16, 32]
  slab_margin: 2""",
        "bd-finite": """\
  set_ball_radius: 2.0
  sets: 6                       # sets x sites_per_set pairs
  sites_per_set: 5
  max_set_size: 6
  site_reach: 8
  margin: 3""",
        "mt5": """\
  compare_offspring: geometric
  # compare_jump: lazy-srw      # exploratory ratio column, never checked
  ball_radii: [1, 2]
  sets: 10
  set_ball_radius: 2.0
  max_set_size: 6
  margin: 3""",
        "halfline": """\
  xmax: 4096
  generations: 1000000
  sup_range: [8, 128]
  flat_range: [32, 128]
  x_check: 2048""",
        "entering": """\
  entering_set: [[0], [2]]
  norms: [8, 16, 32]
  min_accepted: 1000
  margin: 6
  with_range: false""",
        "reduction": """\
  sets:
    - [[0, 0, 0, 0, 0]]
    - [[0, 0, 0, 0, 0], [1, 0, 0, 0, 0]]
    - [[0, 0, 0, 0, 0], [1, 0, 0, 0, 0], [0, 1, 0, 0, 0], [0, 0, 1, 0, 0], [2, 1, 0, 0, 0]]""",
        "green-ratio": """\
  identity_radius: 6
  identity_method: direct
  far_norm: 20.0""",
    },
}

_CRITERIA = {
    "mt1": "slope: 0.3\n  plateau_variation: 0.15\n  plateau_vs_bcap: 0.15\n  key_sigmas: 3.0\n  key_sum: 1.0e-8",
    "qr": "identity_residual: 1.0e-9\n  ratio_halfwidth: 0.05\n  q_agreement: 0.05\n  q_slope: 0.35",
    "mt2": "ball_slope: 0.25\n  singleton_flat: 0.05\n  slab_slope: 0.3",
    "bd-finite": "bound_spread: 20.0",
    "mt5": "{}",
    "halfline": "flat_ratio: 2.0",
    "entering": "histogram_sigmas: 3.0",
    "reduction": "reduction_rel: 0.02",
    "green-ratio": "identity_residual: 1.0e-10\n  box_calibration: 0.05\n  ratio_floor: 0.9",
}


def _box_radius(kind: str, scale: str) -> int:
    return _BOX_RADIUS[scale].get(kind, 8)


def create_experiment_template(kind: str, name: str | None = None, scale: str = "desk") -> str:
    """Create a starter YAML configuration for one experiment kind."""
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"unknown experiment kind '{kind}'; expected one of {EXPERIMENT_KINDS}")
    if scale not in SCALES:
        raise ConfigError(f"unknown scale '{scale}'; expected one of {SCALES}")
    name = name or kind
    dimension, offspring, jump = _LAWS.get(kind, ("5", "binary", "srw"))
    target = _TARGETS[scale].get(kind, "kind: origin")
    criteria = _CRITERIA[kind]
    criteria_block = f" {criteria}" if criteria == "{}" else f"\n  {criteria}"
    radius = _box_radius(kind, scale)
    if scale == "desk":
        box_line = f"box_radius: {radius:<17}# acceptance: {_box_radius(kind, 'acceptance')}"
        samples_line = f"n_samples: {DESK_SAMPLES:<18}# acceptance: {ACCEPTANCE_SAMPLES}"
    else:
        box_line = f"box_radius: {radius}"
        samples_line = f"n_samples: {ACCEPTANCE_SAMPLES}"
    return f"""# {name} - critical branching random walk experiment
# {DESCRIPTIONS[kind]}

experiment:
  name: {name}
  kind: {kind}
  description: "{DESCRIPTIONS[kind]}"
  budget_seconds: 600
  output_dir: runs
  scale: {scale:<20}# desk | acceptance, echoed in summary.json

# =============================================================================
# LAWS
# Offspring presets: binary, geometric, poisson, delta1
# Jump presets: srw, lazy-srw, axis-power (d >= 5); pm1, lazy-pm1 (d = 1)
# =============================================================================
laws:
  dimension: {dimension}
  offspring: {offspring}
  jump: {jump}

# Target set K: origin | points | ball (theta-norm radius) | slab (radius, m)
target:
  {target}

# =============================================================================
# SOLVER
# Fields live on the box [-box_radius, box_radius]^d around the origin.
# =============================================================================
solver:
  {box_line}
  tol: 1.0e-10
  method: sweep                 # sweep | direct | krylov
  nonlinear: picard             # picard | newton-krylov
  bracket: true                 # also solve the upper truncation bracket

monte_carlo:
  {samples_line}
  seed: 20240501
  # threads: 4                  # default: CBRW_THREADS, then 1
  max_tree_size: 10000000
  max_spine_steps: 1000000

params:
{_PARAMS[scale][kind]}

# Tolerance overrides by name
criteria:{criteria_block}
"""


def default_config(kind: str, name: str | None = None, scale: str = "desk") -> ExperimentConfig:
    """The parsed template: what a run without --config uses."""
    return parse_config(yaml.safe_load(create_experiment_template(kind, name, scale)))

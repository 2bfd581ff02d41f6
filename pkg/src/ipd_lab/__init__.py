"""Memory-one iterated Prisoner's Dilemma: Markov analysis, Press-Dyson
coordinates, strategy classification, ZDS duels and replicator dynamics."""
from __future__ import annotations

from .classify import (ClassificationReport, classify, classify_both, classify_coords,
                       exploit_probe, pair_convergence)
from .game import (CONVENTIONAL, ConstraintViolation, PayoffParams, StrategyVector, build_markov,
                   expected_payoffs, initial_distribution, normalize)
from .kernels import BACKEND
from .markov import (NotConvergentToCC, NumericFailure, cesaro_rollout, hitting_times,
                     limit_distribution, terminal_sets)
from .pressdyson import (ALLC, ALLD, GRIM, LAME, PAVLOV, REPEAT, TFT, VERTEX, PressDysonCoords,
                         ZdsPoint, complier_point, complier_top, decompose, edge,
                         equalizer_point, extortion_point, recompose, zds_top)
from .replicator import (Roster, RosterEntry, detect_ess_eus, domination_analysis, integrate,
                         interior_equilibrium_2, payoff_matrix, replicator_field,
                         zero_sum_dynamics)
from .zds import duel_payoffs, kappa, ordering_report

__version__ = "0.1.0"

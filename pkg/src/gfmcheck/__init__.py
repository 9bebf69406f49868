"""Decide whether a nondeterministic Buchi automaton is good for MDPs."""

from .automata import (LassoWord, Nbw, Nfa, Npw, SafetyAutomaton, accepts_lasso, load_automaton,
                       make_complete, make_nbw, productive_states, rebase, serialize)
from .criterion import build_safety_pair, check_criterion, decide_gfm, qgfm_state_set, witness_not_gfm, witness_not_qgfm
from .games import ParityGame, solve_parity_game
from .generators import dollar_extend, fork_of, fork_witness_mc, random_instances, running_example
from .limits import BudgetExceeded, limits
from .mdp import (LabelledMc, LabelledMdp, compare_on_mc, load_model, make_mc, max_buchi_prob,
                  maximal_end_components, product_mdp, psem, psyn)
from .omega import (determinize, difference_witness, is_residual_transition, safety_hull, safety_is_gfg,
                    safety_language_equal)
from .reference import build_gfm_equivalent, is_limit_deterministic
from .trees import accepts_tree, build_stage, decide_qgfm
from .verdict import GFM, NOT_GFM, GfmVerdict

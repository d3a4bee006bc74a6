"""Gibbs-plaid biclustering: plaid likelihood with auto-logistic graph priors,
Swendsen-Wang block label updates and Wang-Landau temperature inference."""

from .core import (BiclusterState, ExpressionMatrix, Hyperparameters,
                   PlaidParameters, constrained_cond_effects,
                   constrained_gene_effects, log_likelihood, mean_surface,
                   partial_residuals, project_effects)
from .engine import (ChainConfig, SamplerTrace, TraceRecord, WangLandauState,
                     bond_probability, compute_field, gamma_schedule,
                     gibbs_update_parameters, propose_temperature, run_chain,
                     swendsen_wang_update, update_log_psi,
                     wl_accept_temperature)
from .graph import (RelationalGraph, TemperatureGrid, avg_nn_bandwidth,
                    build_knn_graph, build_temperature_grid,
                    correlation_distance, edge_weight)
from .selection import (Bicluster, aic, dic_c, f1_average, f1_pair,
                        map_estimate, relative_redundancy,
                        threshold_memberships)
from .simulate import ScenarioSpec, generate_dataset, generate_labels

__version__ = "0.1.0"

"""Categorical mixture models fitted by EM and annealed by entropy-based density."""
from .anneal import AnnealConfig, AnnealResult, AnnealTrace, anneal, initialize, schedule
from .density import (component_density, effective_length, entropy,
                      weighted_average_density)
from .em import EmConfig, e_step, fit, m_step
from .io import IngestConfig, load_csv, load_model, save_model
from .kernels import BACKEND
from .model import (AttributeSpec, ClusterAssignment, Component, Dataset, MixtureModel,
                    Schema, component_probability, posterior, record_likelihood)
from .selection import aic, bic, category_utility, degrees_of_freedom

__version__ = "0.1.0"

from .genotype import (
    CATALOGUE, TEMPLATES,
    catalogue, shape_from_label, get_template,
    random_genotype, uniform_genotype, mutate, decode, canonical_key,
    genotype_to_dict, genotype_from_dict,
)
from .cost import conv_layer_mults, fc_mults, network_cost, genotype_cost, template_max_mults
from .moea import (
    Individual, EvolveState, EvolveSettings,
    dominates, fast_nondominated_sort, crowding_distance, select_survivors,
    update_archive, hypervolume, evolve, worst_fitness,
)
from .evaluator import FitnessCache, FitnessRecord, Evaluator, RetrainResult, retrain_reference

__all__ = [
    "CATALOGUE", "TEMPLATES",
    "catalogue", "shape_from_label", "get_template",
    "random_genotype", "uniform_genotype", "mutate", "decode", "canonical_key",
    "genotype_to_dict", "genotype_from_dict",
    "conv_layer_mults", "fc_mults", "network_cost", "genotype_cost", "template_max_mults",
    "Individual", "EvolveState", "EvolveSettings",
    "dominates", "fast_nondominated_sort", "crowding_distance", "select_survivors",
    "update_archive", "hypervolume", "evolve", "worst_fitness",
    "FitnessCache", "FitnessRecord", "Evaluator", "RetrainResult", "retrain_reference",
]

import numpy as np
import pytest
from pydantic import ValidationError

from app.exceptions import ConfigError, InvariantViolationError
from app.schemas.genotype import REMOVED, Genotype, Mode, NetworkTemplate
from app.search.genotype import (
    canonical_key,
    catalogue,
    decode,
    genotype_from_dict,
    genotype_to_dict,
    get_template,
    mutate,
    random_genotype,
    shape_from_label,
    uniform_genotype,
)


def test_catalogue_order_is_fixed():
    labels = [s.label for s in catalogue()]
    assert labels == ["1x1", "1x3", "3x1", "3x3", "1x5", "5x1", "3x5", "5x3", "5x5"]
    assert [s.id for s in catalogue()] == list(range(1, 10))


def test_shape_from_label():
    assert shape_from_label("5x3").id == 8
    assert shape_from_label(" 3X5 ").id == 7
    with pytest.raises(ConfigError):
        shape_from_label("7x7")


def test_unknown_template_or_dataset():
    with pytest.raises(ConfigError):
        get_template("resnet", "mnist")
    with pytest.raises(ConfigError):
        get_template("lenet5", "svhn")


def test_builtin_templates():
    lenet = get_template("lenet5", "mnist")
    assert lenet.slots == (32, 64) and lenet.input_shape == (1, 28, 28) and lenet.benchmark_shape_id == 9
    four = get_template("four_layer", "cifar10")
    assert four.pool_after == (True, True, False, True) and four.benchmark_shape_id == 4
    assert get_template("three_layer", "cifar10").total_slots == 192


def test_genotype_rejects_bad_alleles():
    with pytest.raises(ValidationError):
        Genotype(layers=((1, 10),))
    with pytest.raises(ValidationError):
        Genotype(layers=((1, REMOVED),), mode=Mode.TWO_OBJ)
    with pytest.raises(ValidationError):
        Genotype(layers=((),))
    assert Genotype(layers=((1, REMOVED),), mode=Mode.THREE_OBJ).kernel_count == 1


def test_random_genotype_shape_and_determinism():
    template = get_template("lenet5", "mnist")
    a = random_genotype(template, Mode.TWO_OBJ, np.random.default_rng(5))
    b = random_genotype(template, Mode.TWO_OBJ, np.random.default_rng(5))
    assert a == b
    assert a.slot_counts == (32, 64)
    assert all(1 <= allele <= 9 for layer in a.layers for allele in layer)


def test_random_genotype_never_removes_in_three_obj(rng):
    template = get_template("lenet5_small", "mnist")
    for _ in range(50):
        genotype = random_genotype(template, Mode.THREE_OBJ, rng)
        assert genotype.kernel_count == template.total_slots


def test_random_alleles_are_uniform(rng):
    template = get_template("lenet5", "mnist")
    alleles = np.concatenate([
        np.concatenate([np.asarray(layer) for layer in random_genotype(template, Mode.TWO_OBJ, rng).layers])
        for _ in range(200)
    ])
    counts = np.bincount(alleles, minlength=10)[1:]
    expected = alleles.size / 9
    assert np.all(np.abs(counts - expected) < 0.1 * expected)


def test_mutate_rate_zero_is_identity(rng):
    template = get_template("lenet5", "mnist")
    genotype = random_genotype(template, Mode.TWO_OBJ, rng)
    assert mutate(genotype, 0.0, rng) == genotype


def test_mutate_rate_one_changes_every_gene(rng):
    template = get_template("lenet5", "mnist")
    genotype = random_genotype(template, Mode.TWO_OBJ, rng)
    child = mutate(genotype, 1.0, rng)
    for parent_layer, child_layer in zip(genotype.layers, child.layers):
        assert all(p != c for p, c in zip(parent_layer, child_layer))
        assert REMOVED not in child_layer


def test_mutate_three_obj_can_remove(rng):
    template = get_template("lenet5", "mnist")
    genotype = uniform_genotype(template, 4, Mode.THREE_OBJ)
    removed = sum(mutate(genotype, 1.0, rng).kernel_count < template.total_slots for _ in range(20))
    assert removed > 0


def test_mutation_frequency_matches_rate(rng):
    template = get_template("lenet5", "mnist")
    genotype = random_genotype(template, Mode.TWO_OBJ, rng)
    parent = np.concatenate([np.asarray(layer) for layer in genotype.layers])
    changed = 0
    trials = 500
    for _ in range(trials):
        child = mutate(genotype, 0.1, rng)
        changed += int(np.sum(np.concatenate([np.asarray(layer) for layer in child.layers]) != parent))
    assert abs(changed / (trials * parent.size) - 0.1) < 0.01


def test_mutation_replacement_excludes_current_value(rng):
    genotype = Genotype(layers=((5,) * 9000,), mode=Mode.TWO_OBJ)
    child = np.asarray(mutate(genotype, 1.0, rng).layers[0])
    counts = np.bincount(child, minlength=10)
    assert counts[0] == 0 and counts[5] == 0
    assert np.all(np.abs(counts[[1, 2, 3, 4, 6, 7, 8, 9]] - 1125) < 150)


def test_mutate_repairs_fully_removed_layer(rng):
    genotype = Genotype(layers=((5,), (2, 2)), mode=Mode.THREE_OBJ)
    for _ in range(300):
        child = mutate(genotype, 1.0, rng)
        assert all(any(a != REMOVED for a in layer) for layer in child.layers)


def test_mutate_rejects_rate_outside_unit_interval(rng):
    genotype = Genotype(layers=((1,),))
    with pytest.raises(ConfigError):
        mutate(genotype, 1.5, rng)
    with pytest.raises(ConfigError):
        mutate(genotype, -0.1, rng)


def test_decode_groups_shapes_by_id(tiny_template):
    spec = decode(Genotype(layers=((9, 1, 3, 1),)), tiny_template)
    branches = spec.layers[0].branches
    assert [b.shape_id for b in branches] == [1, 3, 9]
    assert [b.out_channels for b in branches] == [2, 1, 1]
    assert spec.layers[0].out_channels == 4
    assert spec.layers[0].pool is True


def test_decode_drops_removed_slots():
    template = NetworkTemplate(template_id="t", input_shape=(1, 8, 8), slots=(5,), pool_after=(False,), fc_width=4)
    spec = decode(Genotype(layers=((0, 0, 3, 3, 5),), mode=Mode.THREE_OBJ), template)
    assert [(b.kernel_height, b.kernel_width, b.out_channels) for b in spec.layers[0].branches] == [(3, 1, 2), (1, 5, 1)]
    assert spec.layers[0].out_channels == 3


def test_decode_rejects_slot_mismatch_and_empty_layer(tiny_template):
    with pytest.raises(InvariantViolationError):
        decode(Genotype(layers=((1, 2, 3),)), tiny_template)
    with pytest.raises(InvariantViolationError):
        decode(Genotype(layers=((0, 0, 0, 0),), mode=Mode.THREE_OBJ), tiny_template)


def test_uniform_benchmark_matches_original_network():
    template = get_template("lenet5", "mnist")
    spec = decode(uniform_genotype(template), template)
    assert [[(b.kernel_height, b.kernel_width, b.out_channels) for b in layer.branches] for layer in spec.layers] == [
        [(5, 5, 32)],
        [(5, 5, 64)],
    ]


def test_canonical_key_ignores_order_and_removed_positions():
    a = Genotype(layers=((1, 1, 3, 9),))
    b = Genotype(layers=((9, 3, 1, 1),))
    assert canonical_key(a) == canonical_key(b) == "2.0.1.0.0.0.0.0.1"

    c = Genotype(layers=((0, 4, 0, 4), (2,)), mode=Mode.THREE_OBJ)
    d = Genotype(layers=((4, 0, 4, 0), (2,)), mode=Mode.THREE_OBJ)
    assert canonical_key(c) == canonical_key(d) == "0.0.0.2.0.0.0.0.0|0.1.0.0.0.0.0.0.0"


def test_canonical_key_distinguishes_layers():
    a = Genotype(layers=((1,), (2,)))
    b = Genotype(layers=((2,), (1,)))
    assert canonical_key(a) != canonical_key(b)


def test_genotype_dict_keeps_mode():
    genotype = Genotype(layers=((0, 4), (2,)), mode=Mode.THREE_OBJ)
    data = genotype_to_dict(genotype)
    assert data == {"layers": [[0, 4], [2]], "mode": "three_obj"}
    assert genotype_from_dict(data) == genotype


def test_long_mutation_chains_stay_decodable():
    template = NetworkTemplate(template_id="chain", input_shape=(1, 8, 8), slots=(2, 3), pool_after=(True, False), fc_width=4)
    rng = np.random.default_rng(11)
    genotype = random_genotype(template, Mode.THREE_OBJ, rng)
    for _ in range(10_000):
        genotype = mutate(genotype, 0.5, rng)
        spec = decode(genotype, template)
        assert all(layer.out_channels >= 1 for layer in spec.layers)

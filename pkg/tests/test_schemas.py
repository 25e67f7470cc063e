from fractions import Fraction

import pytest
from hypothesis import given, settings

from born_engine.errors import MalformedInputError
from born_engine.schemas import (
    ExperimentSchema,
    ModelSchema,
    ReportSchema,
    TransformationSchema,
    WeightsSchema,
    json_pointer,
    load_document,
    validate,
)
from born_engine.solvers import solve_equal_norm
from born_engine.equivalence import Permute, Phase, Refine, Relabel
from tests.strategies import exact_models


def model_document(**changes):
    document = {
        "amplitudes": [{"mag2": "1/2"}, {"mag2": "1/2", "phase_turns": "1/4"}],
        "eigenvalues": ["1/2", "-1/2"],
        "payoff": [{"lambda": "1/2", "outcome": "1"}, {"lambda": "-1/2", "outcome": "-1"}],
    }
    document.update(changes)
    return document


def test_model_document_to_model(equal_norm_d2):
    assert validate(model_document(), ModelSchema).to_model() == equal_norm_d2


def test_model_files_load(models_dir):
    for path in sorted(models_dir.glob("*.json")):
        if path.name.startswith(("experiment", "point_mass")):
            continue
        assert load_document(str(path), ModelSchema).to_model().dim >= 2


def test_dim_is_optional_and_written_back(equal_norm_d2):
    assert validate(model_document(dim=2), ModelSchema).to_model() == equal_norm_d2
    document = ModelSchema.from_model(equal_norm_d2).model_dump(by_alias=True, exclude_none=True)
    assert document["dim"] == 2
    assert document["amplitudes"][1] == {"mag2": "1/2", "phase_turns": "1/4"}


def test_decimal_rationals_are_rejected():
    with pytest.raises(MalformedInputError) as info:
        validate(model_document(eigenvalues=["0.5", "-1/2"]), ModelSchema)
    assert info.value.pointer == "/eigenvalues/0"


def test_non_string_rational_is_rejected_with_a_pointer():
    document = model_document(amplitudes=[{"mag2": "1/2"}, {"mag2": 0.5}])
    with pytest.raises(MalformedInputError) as info:
        validate(document, ModelSchema)
    assert info.value.pointer == "/amplitudes/1/mag2"


def test_invalid_documents():
    with pytest.raises(MalformedInputError):
        validate(model_document(amplitudes=[{"mag2": "1/2"}, {"re": 0.5, "im": 0.0}]), ModelSchema)
    with pytest.raises(MalformedInputError):
        validate(model_document(eigenvalues=["1/2"]), ModelSchema)
    with pytest.raises(MalformedInputError):
        validate(model_document(extra=1), ModelSchema)
    with pytest.raises(MalformedInputError):
        validate(model_document(amplitudes=[{"mag2": "1/2x"}, {"mag2": "1"}]), ModelSchema)
    with pytest.raises(MalformedInputError):
        validate({"kind": "permute"}, TransformationSchema)
    with pytest.raises(MalformedInputError):
        validate(model_document(dim=3), ModelSchema)
    with pytest.raises(MalformedInputError):
        validate(model_document(amplitudes=[{"mag2": "1/2", "phase": "1/4"}, {"mag2": "1/2"}]), ModelSchema)


def test_missing_file_is_malformed_input(tmp_path):
    with pytest.raises(MalformedInputError):
        load_document(str(tmp_path / "missing.json"), ModelSchema)
    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    with pytest.raises(MalformedInputError):
        load_document(str(broken), ModelSchema)


def test_json_pointer():
    assert json_pointer(("amplitudes", 0, "mag2")) == "/amplitudes/0/mag2"
    assert json_pointer(()) == "/"
    assert json_pointer(("a/b",)) == "/a~1b"


@given(exact_models())
@settings(max_examples=100)
def test_model_documents_reproduce_the_model(g):
    """Property: a model written as JSON reads back unchanged"""
    document = ModelSchema.from_model(g).model_dump(by_alias=True, exclude_none=True)
    assert validate(document, ModelSchema).to_model() == g


def test_experiment_document(models_dir, equal_norm_d2):
    experiment = load_document(str(models_dir / "experiment_equalnorm_d2.json"), ExperimentSchema).to_experiment()
    assert experiment.d == 2
    assert experiment.stages[0].params == (1, 0)
    assert experiment.superposition_coeffs == equal_norm_d2.psi.coeffs


def test_transformation_documents():
    cases = [
        ({"kind": "permute", "pi": [2, 1, 3]}, Permute((1, 0, 2))),
        ({"kind": "phase", "theta": ["1/4", "0"]}, Phase((Fraction(1, 4), 0))),
        ({"kind": "refine", "z": [1, 2]}, Refine((1, 2))),
        ({"kind": "relabel", "mapping": [["1", "-1"], ["-1", "1"]]}, Relabel(((1, -1), (-1, 1)))),
    ]
    for document, expected in cases:
        schema = validate(document, TransformationSchema)
        assert schema.to_transformation() == expected
        assert TransformationSchema.from_transformation(expected).to_transformation() == expected


def test_weights_document(models_dir):
    weights = load_document(str(models_dir / "point_mass_weights.json"), WeightsSchema).to_weights()
    assert weights.w == (1, 0)
    assert weights.is_exact


def test_report_document(repeated_payoff_d3):
    document = ReportSchema.from_report(solve_equal_norm(repeated_payoff_d3), {"method": "equal"}).model_dump()
    assert document["weights"] == ["1/3", "1/3", "1/3"]
    assert document["outcome_probs"] == {"5": "2/3", "7": "1/3"}
    assert document["gauge_dim"] == 1
    assert document["settings"] == {"method": "equal"}

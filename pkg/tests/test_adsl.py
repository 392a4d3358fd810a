import pytest

from fcl import ast as A
from parsers.adsl import (
    InitialState,
    parse_adsl,
    parse_filter,
    parse_initial_states,
    render_adsl,
)
from parsers.errors import DslSyntaxError, DslValidationError
from parsers.fcdsl import parse_constraints
from parsers.validation import constraint_problems, cross_validate, spec_problems


def test_dragon_spec(dragon_spec):
    assert [c.name for c in dragon_spec.components] == ["Dragon", "Villager", "Silo"]
    assert dragon_spec.component("Villager").display_name == "Villager"
    assert dragon_spec.ensemble("GoToCave").description == "Go to the Cave"
    assert [b.accessor for b in dragon_spec.beyond_control] == ["dragon", "farm"]
    assert [a.method for a in dragon_spec.assignments] == ["assign_in_village", "assign_in_cave"]
    assert dragon_spec.assignment("assign_in_cave").ensembles == ("Attack", "StayInCave", "GoToVillage")
    assert dragon_spec.scenario == "dragon"
    assert dragon_spec.strategy.startswith("All Warriors should go to the Cave")


def test_dragon_initial_states(dragon_spec):
    assert dragon_spec.initial_states == (
        InitialState("Farmers and Warriors", 42, {"farmer_count": 2, "warrior_count": 1}),
        InitialState("No Warriors", 123, {"farmer_count": 2, "warrior_count": 0}),
    )


def test_farm_spec(farm_spec):
    protect = farm_spec.ensemble("Protect")
    assert protect.per == "Field"
    assert protect.instance_id("f2") == "Protect:f2"
    assert protect.group_id("f2") == "protect f2"
    assert farm_spec.ensemble("Idle").group_id("f2") == "idle"
    assert farm_spec.assignment("assign_drones").filter is None
    assert farm_spec.scenario == "farm"


def test_filters_refer_to_the_component(dragon_spec):
    assignment = dragon_spec.assignment("assign_in_village")
    assert assignment.filter == A.Compare(
        "==", A.Attr(A.Var("self"), "location"), A.Literal("Village")
    )
    quantified = parse_filter("exists v in Villagers: v.hp < hp")
    assert quantified.body.left == A.Attr(A.Var("v"), "hp")
    assert quantified.body.right == A.Attr(A.Var("self"), "hp")


@pytest.mark.parametrize("spec", ["dragon_spec", "farm_spec"])
def test_render_parses_back(spec, request):
    original = request.getfixturevalue(spec)
    assert parse_adsl(render_adsl(original)) == original


def test_initial_states_on_their_own():
    text = (
        'initial state "big"\n'
        "  random_seed: 5\n"
        "  farmer_count: 6\n"
        "  counterattack_probability: 0.25\n"
    )
    [state] = parse_initial_states(text)
    assert state.seed == 5
    assert state.parameters == {"farmer_count": 6, "counterattack_probability": 0.25}


class TestErrors:
    def test_seed_is_required(self):
        with pytest.raises(DslSyntaxError) as info:
            parse_initial_states('initial state "s"\n  farmer_count: 2\n')
        assert "seed required for repeatability" in info.value.message

    def test_fractional_seed(self):
        with pytest.raises(DslSyntaxError):
            parse_initial_states('initial state "s"\n  random_seed: 1.5\n')

    def test_duplicate_parameter(self):
        with pytest.raises(DslSyntaxError) as info:
            parse_initial_states('initial state "s"\n  random_seed: 1\n  steps: 3\n  steps: 4\n')
        assert info.value.line == 4

    def test_duplicate_ensemble(self):
        text = 'ensemble Farm\n  name "farm"\nensemble Farm\n  name "again"\n'
        with pytest.raises(DslSyntaxError) as info:
            parse_adsl(text)
        assert info.value.message == "duplicate ensemble id 'Farm'"
        assert info.value.line == 3

    def test_ensemble_needs_a_name(self):
        with pytest.raises(DslSyntaxError):
            parse_adsl('ensemble Farm\n  description "x"\n')

    def test_unknown_declaration(self):
        with pytest.raises(DslSyntaxError) as info:
            parse_adsl("module Dragon\n")
        assert info.value.message == "unknown declaration 'module'"

    def test_indented_line_first(self):
        with pytest.raises(DslSyntaxError):
            parse_adsl("  attribute hp\n")

    def test_assignment_needs_a_method(self):
        text = 'component Villager\nperiodically assign Villager[] "All"\ninto ensembles Farm\n'
        with pytest.raises(DslSyntaxError) as info:
            parse_adsl(text)
        assert info.value.message == "assignment needs 'as <method>'"


class TestValidation:
    def test_corpora_are_consistent(self, dragon_spec, dragon_constraints, farm_spec, farm_constraints,
                                    cadence_constraints):
        cross_validate(dragon_spec, list(dragon_constraints) + list(cadence_constraints))
        cross_validate(farm_spec, farm_constraints)

    def test_undeclared_names(self):
        spec = parse_adsl(
            "component Villager\n"
            "  attribute hp\n"
            'ensemble Farm\n  name "farm"\n'
            'periodically assign Villager[] "All"\n'
            "  if speed > 1\n"
            "into ensembles Farm, Attack\n"
            "as assign_all\n"
        )
        assert spec_problems(spec) == [
            "assignment 'assign_all' names undeclared ensemble 'Attack'",
            "filter of 'assign_all' uses unknown attribute 'speed' of 'Villager'",
            "missing am_interface",
        ]

    def test_constraint_names(self, dragon_spec):
        constraints = parse_constraints(
            'constraint "a"\n'
            "    forall v in Villagers: v.speed > 0 and v in Guard\n"
            'constraint "b"\n'
            "    castle.hp > 0\n"
        )
        assert constraint_problems(dragon_spec, constraints) == [
            'constraint "a": unknown set \'Guard\'',
            'constraint "a": unknown attribute \'speed\'',
            'constraint "b": \'castle\' is not a beyond-control component',
        ]

    def test_initial_state_parameters_are_checked(self, dragon_spec):
        text = 'initial state "bad"\n  random_seed: 1\n  archer_count: 2\n'
        spec = parse_adsl(render_adsl(dragon_spec) + "\n" + text)
        with pytest.raises(DslValidationError) as info:
            cross_validate(spec)
        assert info.value.problems[0].startswith('initial state "bad": unknown parameter \'archer_count\'')

import pytest

from fcl import ast as A
from fcl.errors import (
    FclTypeError,
    MissingComponentError,
    UnboundVariableError,
    UnknownNameError,
    UnresolvedEndcountError,
)
from fcl.evaluator import AnchorKind, Evaluator, analyse, eval_state
from fcl.trace import ComponentState
from parsers.formula_grammar import parse_formula, parse_setexpr
from tests.helpers import flags, snap, villager


@pytest.fixture
def village():
    return snap(
        2,
        components={
            "V01": villager("Farmer", 4, "Village"),
            "V02": villager("Warrior", 6, "Cave"),
            "V03": villager("Warrior", 2, "Village"),
            "D1": ComponentState("Dragon", {"hp": 40}),
        },
        ensembles={
            "Attack": frozenset({"V02"}),
            "Farm": frozenset({"V01"}),
            "Protect:f1": frozenset({"V01"}),
            "Protect:f2": frozenset({"V03"}),
        },
        beyond_control={"dragon": {"hp": 40}, "farm": {"wheat": 12}},
    )


def members(text, snapshot, lets=None):
    return Evaluator(lets).set(parse_setexpr(text), snapshot, {})


class TestNames:
    def test_ensemble_id(self, village):
        assert members("Attack", village) == {"V02"}

    def test_ensemble_family_is_the_union_of_its_instances(self, village):
        assert members("Protect", village) == {"V01", "V03"}

    def test_type_plural(self, village):
        assert members("Villagers", village) == {"V01", "V02", "V03"}
        assert members("Dragons", village) == {"D1"}

    def test_let_shadows_an_ensemble(self, village):
        lets = {"Attack": parse_setexpr("Farm")}
        assert members("Attack", village, lets) == {"V01"}

    def test_unknown_name(self, village):
        with pytest.raises(UnknownNameError):
            members("Cave", village)

    def test_comprehension_and_set_operators(self, village):
        warriors = '{ v in Villagers | v.role == "Warrior" }'
        assert members(warriors, village) == {"V02", "V03"}
        assert members(f"{warriors} intersect Attack", village) == {"V02"}
        assert members("Attack union Farm", village) == {"V01", "V02"}


class TestFormulas:
    def test_count_and_arithmetic(self, village):
        assert eval_state(parse_formula("count(Villagers) == 2 + 1"), village)
        assert eval_state(parse_formula("count(Attack) >= 0.5 * count(Villagers) - 1"), village)

    def test_beyond_control_attribute(self, village):
        assert eval_state(parse_formula("dragon.hp == 40 and farm.wheat >= 10"), village)

    def test_quantifiers(self, village):
        assert eval_state(parse_formula("exists v in Villagers: v.hp < 3"), village)
        assert not eval_state(parse_formula('forall v in Villagers: v.location == "Village"'), village)
        # empty domains
        assert eval_state(parse_formula("forall s in Silos: s.wheat > 100"), village)
        assert not eval_state(parse_formula("exists s in Silos: s.wheat > 100"), village)

    def test_membership_and_id(self, village):
        env = {"v": A.ComponentRef("V02")}
        assert eval_state(parse_formula("v in Attack"), village, env)
        assert eval_state(parse_formula('v.id == "V02"'), village, env)

    def test_endcount_values(self, village):
        assert eval_state(parse_formula("BEG == 2"), village)
        assert eval_state(parse_formula("MAX == 7"), village, length=10)
        with pytest.raises(UnresolvedEndcountError):
            eval_state(parse_formula("MAX > 0"), village)

    def test_implication(self, village):
        formula = parse_formula('forall v in Villagers: v.role == "Warrior" implies v.hp > 1')
        assert eval_state(formula, village)

    def test_boolean_literals(self):
        first, second = flags([True, False])
        assert eval_state(parse_formula("c1.ok == true"), first, {"c1": A.ComponentRef("c1")})
        assert eval_state(parse_formula("c1.ok == false"), second, {"c1": A.ComponentRef("c1")})
        assert not eval_state(parse_formula("true == false"), first)


class TestErrors:
    def test_unbound_variable(self, village):
        with pytest.raises(UnboundVariableError):
            eval_state(parse_formula("x == 1"), village)

    def test_unknown_beyond_control(self, village):
        with pytest.raises(UnknownNameError):
            eval_state(parse_formula("castle.hp > 0"), village)

    def test_unknown_attribute(self, village):
        with pytest.raises(UnknownNameError):
            eval_state(parse_formula("v.speed > 0"), village, {"v": A.ComponentRef("V01")})

    def test_string_and_number_do_not_compare(self, village):
        with pytest.raises(FclTypeError) as info:
            eval_state(parse_formula('v.role < 3'), village, {"v": A.ComponentRef("V01")})
        assert "'<'" in str(info.value)

    def test_missing_component(self, village):
        with pytest.raises(MissingComponentError):
            eval_state(parse_formula("v.hp > 0"), village, {"v": A.ComponentRef("V09")})

    def test_state_evaluation_rejects_within(self, village):
        with pytest.raises(FclTypeError):
            eval_state(parse_formula("within[1, 3] count(Attack) >= 1"), village)


class TestAnalyse:
    def constraint(self, text):
        return A.Constraint("c", (), parse_formula(text))

    def test_forward_within_is_anchored_initially(self):
        shape = analyse(self.constraint("forall d in Dragons: within[1, MAX] d.hp <= 0"))
        assert shape.kind == AnchorKind.INITIAL
        assert [var for var, _ in shape.prefix] == ["d"]

    def test_implication_with_forward_consequent(self):
        shape = analyse(self.constraint(
            "forall v in Villagers: v in GoToCave implies forall a in Attack: within[1, 5] v in Attack"
        ))
        assert shape.kind == AnchorKind.IMPLICATION
        assert [var for var, _ in shape.consequent_prefix] == ["a"]

    def test_everything_else_is_a_state_constraint(self):
        shape = analyse(self.constraint("within[2, -5] count(Attack) >= 1 implies count(Farm) == 0"))
        assert shape.kind == AnchorKind.STATE
        assert analyse(self.constraint("count(Farm) <= 3")).kind == AnchorKind.STATE

import io
import json
import random

import pytest

from tkindex.charring import FiniteCharacter
from tkindex.errors import InvariantError, SchemaError
from tkindex.genchar import Window, truncate
from tkindex.ktheory import KClass
from tkindex.lattice import CharacterGroup, Flag, GModule
from tkindex.serialize import (
    SCHEMA,
    dumps,
    genchar_from_json,
    genchar_to_json,
    kclass_from_json,
    kclass_to_json,
    parse_problem,
    problem_to_json,
    rat_from_json,
    rat_to_json,
)
from tkindex.verify import random_genchar

MINIMAL = {
    "version": SCHEMA,
    "group": {"rank": 1, "torsion": []},
    "modules": {"V": {"weights": [{"free": [1], "torsion": []}], "trivial_real_dim": 0}},
    "gen_chars": {
        "thom": {"index_thom": {"module": "V", "beta": ["1"]}},
        "all": {"delta": [1]},
        "both": {"add": [{"ref": "thom"}, {"neg": {"ref": "all"}}]},
        "f": {"flag": {"module": "V", "index": 0}},
        "odd": {"induction": {"chi": [2], "phi": {"finite": [{"weight": {"free": [], "torsion": [1]}, "coeff": 1}]}}},
    },
    "queries": [{"cmd": "truncate", "phi": "thom", "window": "-3..3"}],
}


def torsion_problem(weight):
    return {
        "version": SCHEMA,
        "group": {"rank": 1, "torsion": [3]},
        "modules": {"V": {"weights": [weight], "trivial_real_dim": 0}},
    }


class TestAtoms:
    @pytest.mark.parametrize("x", ["3", "-1/2", "7/4", 5])
    def test_rationals(self, x):
        assert rat_from_json(rat_to_json(rat_from_json(x, "x")), "x") == rat_from_json(x, "x")

    @pytest.mark.parametrize("bad", ["1/0", "abc", 1.5, True, None])
    def test_bad_rationals(self, bad):
        with pytest.raises(SchemaError):
            rat_from_json(bad, "x")


class TestProblem:
    def test_minimal_parses(self):
        p = parse_problem(MINIMAL)
        vals = p.evaluate()
        w = Window.cube(1, -3, 3)
        G = p.group
        assert truncate(vals["thom"], w) == FiniteCharacter(G, {G.weight((k,)): -1 for k in (1, 2, 3)})
        assert truncate(vals["f"], w) == truncate(vals["all"], w)
        assert truncate(vals["odd"], w) == FiniteCharacter(G, {G.weight((k,)): 1 for k in (-3, -1, 1, 3)})

    def test_sources(self, tmp_path):
        text = json.dumps(MINIMAL)
        path = tmp_path / "p.json"
        path.write_text(text)
        ref = problem_to_json(parse_problem(MINIMAL))
        for src in (str(path), io.StringIO(text), text):
            assert problem_to_json(parse_problem(src)) == ref

    def test_round_trip(self):
        once = problem_to_json(parse_problem(MINIMAL))
        twice = problem_to_json(parse_problem(json.loads(dumps(once))))
        assert once == twice

    def test_torsion_out_of_range(self):
        with pytest.raises(InvariantError):
            parse_problem(torsion_problem({"free": [1], "torsion": [3]}))

    def test_torsion_only_weight(self):
        with pytest.raises(InvariantError):
            parse_problem(torsion_problem({"free": [0], "torsion": [1]}))

    @pytest.mark.parametrize(
        "patch",
        [
            {"version": "tkindex/0"},
            {"group": {"rank": "one"}},
            {"modules": []},
            {"queries": [{"nocmd": 1}]},
            {"gen_chars": {"x": {"bogus": 1}}},
            {"gen_chars": {"x": {"scale": {"k": "2", "phi": {"delta": [1]}}}}},
        ],
    )
    def test_schema_errors(self, patch):
        with pytest.raises(SchemaError):
            parse_problem({**MINIMAL, **patch})

    @pytest.mark.parametrize(
        "patch",
        [
            {"gen_chars": {"x": {"ref": "nowhere"}}},
            {"gen_chars": {"x": {"ref": "y"}, "y": {"neg": {"ref": "x"}}}},
            {"gen_chars": {"x": {"index_thom": {"module": "W", "beta": ["1"]}}}},
        ],
    )
    def test_name_errors(self, patch):
        with pytest.raises(InvariantError):
            parse_problem({**MINIMAL, **patch})

    def test_forward_reference(self):
        p = parse_problem({**MINIMAL, "gen_chars": {"a": {"neg": {"ref": "b"}}, "b": {"delta": [1]}}})
        vals = p.evaluate()
        assert (vals["a"] + vals["b"]).parts == {}

    def test_invalid_json(self):
        with pytest.raises(SchemaError) as e:
            parse_problem("{not json")
        assert e.value.code == "E_SCHEMA"


class TestValues:
    @pytest.mark.parametrize("seed", range(10))
    def test_genchar_round_trip(self, seed):
        rng = random.Random(seed)
        G = CharacterGroup(rng.randint(1, 2), (2,) if seed % 2 else ())
        phi = random_genchar(rng, G)
        back = genchar_from_json(json.loads(dumps(genchar_to_json(phi))))
        assert back.parts == phi.parts

    def test_kclass_round_trip(self, circle, S1):
        k = KClass.thom(circle, (1,)) + KClass.flag(circle, Flag(((S1.weight((1,)),),), ((1,),)))
        back = kclass_from_json(json.loads(dumps(kclass_to_json(k))), S1)
        assert back == k

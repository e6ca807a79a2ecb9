import json
from fractions import Fraction

import pytest

from groupconvex import FiniteGroup, Params, finite_set, scaling
from groupconvex.cli import (
    EXIT_HYPOTHESIS,
    EXIT_INPUT,
    EXIT_OK,
    EXIT_REFUTED,
    format_session,
    main,
    parse_session_text,
    session_to_dict,
)
from groupconvex.errors import ParseError, ValidationError

Z9_SESSION = """
{
  "group": {"kind": "finite", "moduli": [9]},
  "metric": {"kind": "cyclic", "weights": ["1"]},
  "endos": {"T": [["2"]], "S": [["3"]]},
  "sets": {"D": {"kind": "finite", "elements": [["0"], ["3"], ["6"]]},
           "E": {"kind": "finite", "elements": [["0"], ["1"]]}}
}
"""

ZLINE_SESSION = """
{"group": {"kind": "int", "dim": 1}, "metric": {"kind": "linf", "weights": ["1"]}}
"""

RCT_SESSION = """
{
  "group": {"kind": "dyadic", "dim": 1},
  "metric": {"kind": "linf", "weights": ["1"]},
  "sets": {"A": {"kind": "finite", "elements": [["1/2^2"]]},
           "B": {"kind": "box", "lo": ["0"], "hi": ["1"]},
           "C": {"kind": "finite", "elements": [["0"], ["1/2^1"]]}},
  "params": {"n0": 2}
}
"""


@pytest.fixture
def z9_session(tmp_path):
    path = tmp_path / "z9.json"
    path.write_text(Z9_SESSION)
    return str(path)


@pytest.fixture
def zline_session(tmp_path):
    path = tmp_path / "zline.json"
    path.write_text(ZLINE_SESSION)
    return str(path)


@pytest.fixture
def rct_session(tmp_path):
    path = tmp_path / "rct.json"
    path.write_text(RCT_SESSION)
    return str(path)


# -- parsing -------------------------------------------------------------------

def test_parse_session(z9_session=None):
    inst = parse_session_text(Z9_SESSION)
    assert inst.group == FiniteGroup((9,))
    assert inst.endos["T"] == scaling(inst.group, 2)
    assert inst.sets["D"] == finite_set(inst.group, [[0], [3], [6]])
    assert inst.params == Params()


def test_parse_round_trip():
    for text in (Z9_SESSION, ZLINE_SESSION, RCT_SESSION):
        session = parse_session_text(text)
        assert parse_session_text(format_session(session)) == session


def test_round_trip_table_metric():
    text = json.dumps(
        {
            "group": {"kind": "finite", "moduli": [4]},
            "metric": {
                "kind": "table",
                "values": {"0": "0", "1": "1", "2": "3/2", "3": "1"},
            },
        }
    )
    session = parse_session_text(text)
    assert parse_session_text(format_session(session)) == session


def test_parse_error_on_bad_json():
    with pytest.raises(ParseError):
        parse_session_text("{not json")


def test_parse_error_on_duplicate_names():
    text = (
        '{"group": {"kind": "int", "dim": 1},'
        ' "metric": {"kind": "linf", "weights": ["1"]},'
        ' "endos": {"T": [["1"]], "T": [["2"]]}}'
    )
    with pytest.raises(ParseError):
        parse_session_text(text)


def test_parse_error_on_unknown_params():
    with pytest.raises(ParseError):
        parse_session_text(
            '{"group": {"kind": "int", "dim": 1},'
            ' "metric": {"kind": "linf", "weights": ["1"]},'
            ' "params": {"bogus": 1}}'
        )


def test_parse_validation_error_bad_homomorphism():
    text = json.dumps(
        {
            "group": {"kind": "finite", "moduli": [4, 2]},
            "metric": {"kind": "cyclic", "weights": ["1", "1"]},
            "endos": {"T": [["0", "1"], ["0", "0"]]},
        }
    )
    from groupconvex.errors import NotAHomomorphism

    with pytest.raises(NotAHomomorphism):
        parse_session_text(text)


def test_parse_rejects_refuted_metric():
    text = json.dumps(
        {
            "group": {"kind": "finite", "moduli": [4]},
            "metric": {"kind": "table", "values": {"0": "0", "1": "1", "2": "5", "3": "1"}},
        }
    )
    with pytest.raises(ValidationError):
        parse_session_text(text)


def test_session_dict_omits_default_params():
    session = parse_session_text(Z9_SESSION)
    assert "params" not in session_to_dict(session)


# -- commands ------------------------------------------------------------------

def test_cmd_mu(z9_session, capsys):
    code = main(["mu", z9_session, "T"])
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip() == "1/4"


def test_cmd_norm(z9_session, capsys):
    assert main(["norm", z9_session, "7"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "2"


def test_cmd_endo_norm(z9_session, capsys):
    assert main(["endo-norm", z9_session, "T"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "2"


def test_cmd_rho_json(z9_session, capsys):
    assert main(["rho", z9_session, "S", "--json"]) == EXIT_OK
    record = json.loads(capsys.readouterr().out)
    assert record == {"command": "rho", "lower": "0", "upper": "0", "exact": True}


def test_cmd_invert(z9_session, capsys):
    assert main(["invert", z9_session, "S"]) == EXIT_OK
    assert "[4]" in capsys.readouterr().out


def test_cmd_invert_shifted(z9_session, capsys):
    # (T - S)^-1 with T = pi2, S = pi3: difference pi8, inverse pi8
    assert main(["invert", z9_session, "T", "S"]) == EXIT_OK
    assert "[8]" in capsys.readouterr().out


def test_cmd_hull(z9_session, capsys):
    assert main(["hull", z9_session, "E", "--json"]) == EXIT_OK
    record = json.loads(capsys.readouterr().out)
    assert record["complete"] is True


def test_cmd_is_convex_exit_codes(z9_session, capsys):
    assert main(["is-convex", z9_session, "D"]) == EXIT_OK
    capsys.readouterr()
    assert main(["is-convex", z9_session, "E", "T"]) == EXIT_REFUTED


def test_cmd_is_n_convex(z9_session, capsys):
    assert main(["is-n-convex", z9_session, "D", "2"]) == EXIT_OK
    capsys.readouterr()
    assert main(["is-n-convex", z9_session, "E", "2"]) == EXIT_REFUTED


def test_cmd_family_json(z9_session, capsys):
    assert main(["family", z9_session, "D", "--json"]) == EXIT_OK
    record = json.loads(capsys.readouterr().out)
    assert len(record["members"]) == 9


def test_cmd_recursion(z9_session, capsys):
    assert main(["recursion", z9_session, "T", "2"]) == EXIT_OK
    assert "[5]" in capsys.readouterr().out


def test_cmd_verify_exa_tilde(zline_session, capsys):
    assert main(["verify", zline_session, "EXA_TILDE", "--json"]) == EXIT_OK
    record = json.loads(capsys.readouterr().out)
    assert record["status"] == "Proved"
    assert record["witness"] == [{"endo": [["2"]]}]


def test_cmd_verify_rct(rct_session, capsys):
    assert main(["verify", rct_session, "THM_RCT"]) == EXIT_OK
    assert "Proved" in capsys.readouterr().out


def test_cmd_verify_hypothesis_exit(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(
        json.dumps(
            {
                "group": {"kind": "dyadic", "dim": 1},
                "metric": {"kind": "linf", "weights": ["1"]},
                "sets": {
                    "A": {"kind": "finite", "elements": [["1/2^2"]]},
                    "B": {"kind": "finite", "elements": [["0"], ["1"]]},
                    "C": {"kind": "finite", "elements": [["0"]]},
                },
                "params": {"n0": 2},
            }
        )
    )
    code = main(["verify", str(bad), "THM_RCT"])
    assert code == EXIT_HYPOTHESIS
    assert "n0-convex" in capsys.readouterr().err


def test_cmd_verify_unknown_property(zline_session, capsys):
    assert main(["verify", zline_session, "NOPE"]) == EXIT_INPUT


def test_cmd_search_exhausted(tmp_path, capsys):
    session = tmp_path / "z9.json"
    session.write_text(
        json.dumps(
            {
                "group": {"kind": "finite", "moduli": [9]},
                "metric": {"kind": "cyclic", "weights": ["1"]},
                "params": {"budget": 5},
            }
        )
    )
    code = main(["search", str(session), "THM_RCT"])
    assert code == EXIT_INPUT
    assert "mu_d(n) <= 1" in capsys.readouterr().err


def test_cmd_search_exhaustive_proves(tmp_path, capsys):
    session = tmp_path / "z12.json"
    session.write_text(
        json.dumps(
            {
                "group": {"kind": "finite", "moduli": [12]},
                "metric": {"kind": "cyclic", "weights": ["1"]},
                "params": {"budget": 144},
            }
        )
    )
    code = main(["search", str(session), "LEMMA_MU", "--exhaustive", "--json"])
    assert code == EXIT_OK
    assert json.loads(capsys.readouterr().out)["status"] == "Proved"


def test_cmd_search_unfalsified(tmp_path, capsys):
    session = tmp_path / "dy.json"
    session.write_text(
        json.dumps(
            {
                "group": {"kind": "dyadic", "dim": 1},
                "metric": {"kind": "linf", "weights": ["1"]},
                "params": {"budget": 20, "seed": 7},
            }
        )
    )
    code = main(["search", str(session), "THM_RCT", "--json"])
    assert code == 2
    record = json.loads(capsys.readouterr().out)
    assert record["status"] == "Unfalsified" and record["samples"] == 20


def test_missing_session_file(capsys):
    assert main(["mu", "/nonexistent/session.json", "T"]) == EXIT_INPUT


def test_usage_errors_map_to_input_error(capsys):
    # argparse's own exit code must not collide with the Unfalsified code
    assert main(["bogus-command"]) == EXIT_INPUT
    capsys.readouterr()
    assert main(["mu"]) == EXIT_INPUT
    capsys.readouterr()
    assert main(["--help"]) == EXIT_OK


def test_horizon_flag_overrides_session(tmp_path, capsys):
    session = tmp_path / "dy.json"
    session.write_text(
        json.dumps(
            {
                "group": {"kind": "dyadic", "dim": 1},
                "metric": {"kind": "linf", "weights": ["1"]},
                "endos": {"T": [["3/2^1"]]},
            }
        )
    )
    assert main(["rho", str(session), "T", "--horizon", "1", "--json"]) == EXIT_OK
    wide = json.loads(capsys.readouterr().out)
    assert main(["rho", str(session), "T", "--horizon", "8", "--json"]) == EXIT_OK
    tight = json.loads(capsys.readouterr().out)
    assert Fraction(tight["upper"]) <= Fraction(wide["upper"])


def test_budget_flag_overrides_session(tmp_path, capsys):
    session = tmp_path / "dy.json"
    session.write_text(
        json.dumps(
            {
                "group": {"kind": "dyadic", "dim": 1},
                "metric": {"kind": "linf", "weights": ["1"]},
                "params": {"budget": 3},
            }
        )
    )
    assert main(["search", str(session), "THM_RCT", "--budget", "9", "--json"]) == 2
    record = json.loads(capsys.readouterr().out)
    assert record["samples"] == 9


def test_output_is_exact_rational_text(rct_session, capsys):
    main(["norm", rct_session, "3/2^1"])
    out = capsys.readouterr().out.strip()
    assert out == "3/2"
    assert "." not in out


def test_box_convexity_through_cli(tmp_path, capsys):
    session = tmp_path / "dybox.json"
    session.write_text(
        json.dumps(
            {
                "group": {"kind": "dyadic", "dim": 2},
                "metric": {"kind": "linf", "weights": ["1", "1"]},
                "endos": {"H": [["1/2^1", "0"], ["0", "3/2^2"]]},
                "sets": {"D": {"kind": "box", "lo": ["0", "0"], "hi": ["1", "2"]}},
            }
        )
    )
    assert main(["is-convex", str(session), "D", "H"]) == EXIT_OK
    capsys.readouterr()
    assert main(["is-n-convex", str(session), "D", "4"]) == EXIT_OK
    capsys.readouterr()
    assert main(["is-n-convex", str(session), "D", "3"]) == EXIT_REFUTED

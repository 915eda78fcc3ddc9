from fractions import Fraction

import numpy as np
import pytest

from tss3dkp.bounds import printer_upper_bound
from tss3dkp.deteq import build_det_equiv
from tss3dkp.lp import LpProblem
from tss3dkp.mip import MipParams, MipProblem, solve_mip
from tss3dkp.mps import MpsError, export_mps, mps_text, parse_mps

from conftest import make_instance


def same_model(a: MipProblem, b: MipProblem):
    assert a.lp.var_names == b.lp.var_names
    assert a.lp.row_names == b.lp.row_names
    assert a.lp.objective == b.lp.objective
    assert a.lp.senses == b.lp.senses
    assert np.array_equal(a.lp.rhs, b.lp.rhs)
    assert np.array_equal(a.lp.lower, b.lp.lower) and np.array_equal(a.lp.upper, b.lp.upper)
    assert (a.lp.matrix != b.lp.matrix).nnz == 0
    assert a.integer == b.integer


@pytest.mark.parametrize("negate", [False, True])
def test_round_trip(tmp_path, packing, negate):
    problem, vmap = build_det_equiv(packing, printer_upper_bound(packing).Z)
    path = tmp_path / "m.mps"
    export_mps(problem, vmap, path, negate=negate)
    back = parse_mps(path)
    same_model(problem, back)
    assert solve_mip(back, MipParams(0)).objective == Fraction(26, 25)


def test_names_and_sections(packing):
    problem, _ = build_det_equiv(packing, 2)
    text = mps_text(problem)
    for token in ("OBJSENSE", "    MAX", "INTORG", "BOUNDS", " UP BND y_2 1", "p_1_2_s2", "ENDATA"):
        assert token in text


def test_third_probabilities_written_as_doubles(tmp_path):
    inst = make_instance([(1, 1, 1)], W=1, V=1,
                         scenarios=[(Fraction(1, 3), (1,)), (Fraction(2, 3), (0,))])
    problem, vmap = build_det_equiv(inst, 0)
    path = tmp_path / "t.mps"
    export_mps(problem, vmap, path)
    back = parse_mps(path)
    assert float(back.lp.objective[vmap.matched[0][0]]) == pytest.approx(1 / 3)


def test_empty_model(tmp_path):
    problem = MipProblem(LpProblem([], np.zeros((0, 0)), [], [], [], []))
    path = tmp_path / "e.mps"
    export_mps(problem, path=path)
    back = parse_mps(path)
    assert back.lp.n_vars == 0 and back.lp.n_rows == 0


def test_hand_written(tmp_path):
    path = tmp_path / "h.mps"
    path.write_text(
        "NAME tiny\n"
        "ROWS\n N cost\n L c1\n G c2\n"
        "COLUMNS\n"
        "    MARKER 'MARKER' 'INTORG'\n"
        "    x cost -3 c1 1\n    x c2 1\n"
        "    MARKER 'MARKER' 'INTEND'\n"
        "    y cost -2 c1 1\n"
        "RHS\n    RHS c1 4 c2 1\n"
        "BOUNDS\n UP BND x 3\n UP BND y 2.5\n"
        "ENDATA\n"
    )
    p = parse_mps(path)
    assert p.lp.var_names == ("x", "y")
    assert p.integer == (True, False)
    assert p.lp.objective == (Fraction(3), Fraction(2))  # minimisation read back as a maximisation
    assert p.lp.senses == ("<=", ">=")
    assert p.lp.upper.tolist() == [3, 2.5]


@pytest.mark.parametrize("body, match", [
    ("RANGES\n", "unsupported section RANGES"),
    ("ROWS\n Q r\n", "unknown row type"),
    ("BOUNDS\n SC BND x 1\n", "unsupported bound type"),
])
def test_rejects_unsupported(tmp_path, body, match):
    path = tmp_path / "bad.mps"
    path.write_text("NAME bad\n" + body + "ENDATA\n")
    with pytest.raises(MpsError, match=match):
        parse_mps(path)

"""Smoke test for the pfc extension module.

Build and install first, e.g.:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/pfc-*.whl
    python python/smoke_test.py
"""

from fractions import Fraction
from pathlib import Path

import pfc

FAMILIES = Path(__file__).resolve().parent.parent / "families"


def main():
    sig = pfc.Signature.k23()
    assert ("R", 2) in sig.relations

    k23 = pfc.FamilySpec.from_path(str(FAMILIES / "k23.json"))
    m2 = k23.member(2)
    assert m2.size == 10
    assert m2.relation_len("R") == 12
    assert m2.validate(sig) == []

    p1 = pfc.Formula.parse("P1(x)", sig)
    assert pfc.count(m2, p1, ["x"]) == 6
    r = k23.parse("R(x,y)")
    assert str(r) == "R(x, y)"
    assert r.free_variables() == ["x", "y"]
    assert pfc.count(m2, r, ["y"], {"x": 0}) == 3
    assert m2.evaluate(r, {"x": 0, "y": 2})

    classes = pfc.spectrum(m2, r, ["x"], ["y"])["entries"]
    assert [(c["cardinality"], len(c["members"])) for c in classes] == [(2, 6), (0, 4)]
    q = pfc.quotient_identity(m2, r, ["x"], ["y"])
    assert q["b"] == 3 and q["projection_count"] == 4 and q["holds"]

    report = pfc.fit(k23, k23.parse("x = x"), ["x"], q="P0(v)", indices=list(range(1, 13)))
    assert report["class_count_stable"]
    assert report["classes"][0]["polynomial"] == "(5/2)*X"

    mec = pfc.fit(k23, r, ["x"], ["y"], q="P0(v)", indices=list(range(1, 7)), detail=True)
    assert [c["polynomial"] for c in mec["classes"]] == ["2", "0"]
    assert mec["classes"][1]["class_sizes"] == [2, 4, 6, 8, 10, 12]

    nd = pfc.ndim(k23, p1, ["x"], 1, q="P0(v)")
    assert nd["pass"] and nd["entries"][0]["mu_exact"] == "3/5"

    alt = pfc.FamilySpec.from_path(str(FAMILIES / "alternating.json"))
    rows = pfc.zero_one(alt, [alt.parse("exists x. Q(x)")])
    assert not rows[0]["stabilized"]

    bound = pfc.num_bound(k23, r, ["x"], ["y"])
    assert bound["bound"] == 3 and bound["caveat"]

    x = pfc.Formula.parse("P0(x)", sig)
    y = pfc.Formula.parse("P1(x)", sig)
    assert pfc.check_partition(m2, [x, y], ["x"])

    poly = pfc.Polynomial([0, 4, 1])
    assert str(poly) == "4*X + X^2"
    assert poly(Fraction(1, 2)) == Fraction(9, 4)
    assert pfc.inverse_shift_limit(poly) == 2
    check = pfc.inverse_shift_check(poly, [1e4, 1e6, 1e8], 2.0)
    assert check["pass"]
    fitted = pfc.interpolate([(x, Fraction(5, 2) * x) for x in range(1, 5)])
    assert fitted == pfc.Polynomial.parse("(5/2)*X")
    lead = pfc.composed_leading(pfc.Polynomial([0, 3]), pfc.Polynomial([0, 5]))
    assert lead["mu_exact"] == "3/5"

    try:
        pfc.Formula.parse("P1(x) &", sig)
    except ValueError as e:
        assert "position" in str(e)
    else:
        raise AssertionError("parse error expected")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()

"""Smoke test for the `pfcs` extension module.

Build and install it first:

    pip install maturin
    maturin develop -m crates/python/Cargo.toml
"""

import json

import pfcs


def main():
    f = pfcs.Field(7)
    assert f.prime == 7
    assert f.add(5, 4) == 2
    assert f.sub(2, 5) == 4
    assert f.mul(3, 5) == 1
    assert f.inv(3) == 5
    assert f.neg(1) == 6
    assert f.reduce(-1) == 6
    assert f.pow(3, 6) == 1
    try:
        f.inv(0)
    except ValueError:
        pass
    else:
        raise AssertionError("inverse of zero")
    try:
        pfcs.Field(8)
    except ValueError:
        pass
    else:
        raise AssertionError("8 accepted as a prime")

    src = "boolean_assert(x) { x * (1 + -1 * x) == 0 }\n"
    s = pfcs.PfcsSystem(src)
    assert s.relations() == ["boolean_assert"]
    assert s.params("boolean_assert") == ["x"]
    assert str(s) == "boolean_assert(x) {\n  x * (1 + -1 * x) == 0\n}\n"
    assert s.sat("boolean_assert", 7, [1]) == {"x": 1}
    assert s.sat("boolean_assert", 7, [2]) is None

    g = pfcs.PfcsSystem.gadget("equality_test")
    assert g.sat("equality_test", 7, [3, 5, 0])["s"] == 3
    assert json.loads(g.sat_json("equality_test", 7, [3, 3, 0]))["outcome"] == "unsatisfiable"
    assert g.flatten_equivalent("equality_test", 5)

    verdict = json.loads(g.verify("equality_test", 5, "equality_test", checks=["sound", "complete", "det"]))
    assert verdict["sound"]["passed"] and verdict["complete"]["passed"]
    assert verdict["deterministic"]["passed"]

    b = pfcs.PfcsSystem.gadget("bits_to_field_unchecked", 3)
    verdict = json.loads(b.verify("bits_to_field_unchecked_3", 7, "bits_to_field_3", checks=["det"], inputs=["f"]))
    assert not verdict["deterministic"]["passed"]

    r = g.flatten("equality_test", 7)
    assert len(r) == 2
    assert r.prime == 7
    assert r.variables[:3] == ["u", "v", "w"]
    assert r.holds({"u": 3, "v": 5, "w": 0, "equality_test.0.s": 3})
    assert not r.holds({"u": 3, "v": 5, "w": 1, "equality_test.0.s": 3})

    again = pfcs.R1cs.from_json(r.to_json())
    assert again.equals(r)
    assert json.loads(again.diff_json(r)) == {"divergence": None, "equal": True}
    report = json.loads(r.simplify_json())
    assert "residual" in report and "eliminated" in report

    flat = json.loads(g.flatten_json("equality_test", 7))
    assert flat["internal_names"] == ["equality_test.0.s"]
    assert pfcs.DEFAULT_BUDGET == 10**7
    print("smoke test passed")


if __name__ == "__main__":
    main()

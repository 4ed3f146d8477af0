"""Smoke test for the Python bindings: load, solve, audit, reproduce."""

import asylum_match as am


def main():
    inst = am.Instance.bundled("example6")
    outcome = am.cumulative_offer(inst)
    assert outcome == [
        ("a1", "m1", "1"),
        ("a2", "m3", "1"),
        ("a3", "m2", "1"),
        ("a4", "m4", "2"),
    ], outcome
    assert am.is_stable(inst, outcome).passed
    assert am.enumerate_stable(inst) == [outcome]

    ex1 = am.Instance.bundled("example1")
    chosen = am.choose(ex1, "m", [("a1", "m", "1"), ("a1", "m", "2"), ("a2", "m", "2")])
    assert chosen == [("a1", "m", "1"), ("a2", "m", "2")], chosen
    sub = am.audit_choice(ex1, "m", "sub")
    assert not sub.passed and len(sub.witnesses) == 1
    assert am.audit_choice(ex1, "m", "sub", variant="completed").passed

    sp = am.audit_sp(inst)
    assert not sp.passed and "a2" in sp.witnesses[0]
    assert sp.render().rstrip().endswith("VERDICT: fail 1")

    assert am.enumerate_stable(am.Instance.bundled("example5")) == []

    again = am.Instance.parse(inst.to_json())
    assert again.to_json() == inst.to_json()
    assert am.Instance.parse(am.Instance.bundled("example3").to_json(), structural=True)
    try:
        am.Instance.parse(am.Instance.bundled("example3").to_json())
    except ValueError as e:
        assert "quota" in str(e)
    else:
        raise AssertionError("example3 should fail full validation")

    gen = am.Instance.generate(7, "homogeneous", "3x2x2")
    assert am.is_stable(gen, am.cumulative_offer(gen)).passed
    assert am.audit_sp(gen, domain="full").passed

    for name in ["example%d" % i for i in range(1, 8)]:
        ok, text = am.reproduce(name)
        assert ok, text

    print("smoke test passed")


if __name__ == "__main__":
    main()

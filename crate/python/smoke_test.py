"""Smoke test for the lpadic_py extension.

Build and install first, e.g. `pip install ./crates/py` or
`maturin develop -m crates/py/Cargo.toml`, then run `python python/smoke_test.py`.
"""

import json

import lpadic_py as lp


def main():
    assert lp.bernoulli_number(2) == "1/6"
    assert lp.bernoulli_number(12) == "-691/2730"

    ctx = lp.Context(5, 3, 20)
    assert (ctx.p, ctx.f, ctx.prec) == (5, 2, 20)
    third = ctx.rational(1, 3)
    assert third * ctx.rational(3, 1) == ctx.rational(1, 1)
    assert ctx.from_json(third.to_json()) == third

    # trivial zero at p = 7, nonzero value 2/3 at p = 5
    value, deriv, cert = lp.lp("quad3", 7, 1, 0)
    assert value.is_zero() and not deriv.is_zero() and cert >= 18
    series = lp.lp("quad3", 7, 1, 0, route="series")
    assert series[1].agreement(deriv) >= 17

    value, _, cert = lp.lp("quad3", 5, 1, 0)
    two_thirds = lp.Context(5, 2, 20).rational(2, 3)
    assert value.agreement(two_thirds) >= min(cert, 18), str(value)

    report = json.loads(lp.classify())
    assert report["summary"]["passed"], report["summary"]

    q, l_fm = lp.tate(5, 1, 5)
    assert q.val == 1
    ok, _ = lp.tate_check(7, samples=3)
    assert ok

    ok, lines = lp.verify([7, 9])
    assert ok, lines
    for line in lines:
        print(line)
    print("smoke test passed")


if __name__ == "__main__":
    main()

import math
from fractions import Fraction

import mpmath as mp
import pytest
from hypothesis import given, strategies as st

from benjamin_lab.symbolic import (
    DistributionOrderOverflow, GaussianRational, Hypotheses, Monomial, SymExpr, SymParseError,
    compare_with_allowlist, delta_coefficient_formula, differentiate, differentiate_with_phase, evaluate,
    load_allowlist, load_transcriptions, parse, parse_transcriptions, render, sigma, verify_expansion,
)

I = GaussianRational(0, 1)


def key(sigma_order=-1, delta=0, t=0, xi=0, abs_=0, sgn=0):
    return Monomial(sigma_order, delta, t, xi, abs_, sgn)


def coeff(re=0, im=0):
    return GaussianRational(Fraction(re), Fraction(im))


def raw_terms(with_delta):
    coefficient = st.tuples(st.integers(-5, 5), st.integers(-5, 5), st.integers(1, 4)).map(
        lambda c: GaussianRational(Fraction(c[0], c[2]), Fraction(c[1], c[2])))
    return st.lists(st.tuples(
        coefficient, st.integers(0, 3), st.integers(0, 3), st.integers(0, 2), st.integers(0, 3),
        st.integers(0, 1) if with_delta else st.just(0), st.integers(0, 2)), max_size=6)


def exprs(with_delta=False):
    return raw_terms(with_delta).map(SymExpr.from_raw)


def test_parse_examples():
    assert len(parse("0")) == 0
    assert render(parse("sgn^2 * sigma^(0)")) == "sigma^(0)"
    assert render(parse("xi*delta*sigma^(1)")) == "0"
    assert len(parse("sgn*delta*sigma^(0)")) == 0
    assert parse("abs^2") == parse("xi^2")
    assert parse("xi*abs") == parse("xi^2*sgn")
    assert parse("(1/2 + 3/2*i)*t") == SymExpr({key(t=1): coeff(Fraction(1, 2), Fraction(3, 2))})
    assert parse("2 - 2") == parse("0")


def test_parse_errors():
    for text, pos in (("xi +* t", 4), ("sigma^(x)", 7), ("xi^-1", 3), ("t $ xi", 2), ("(xi", 3)):
        with pytest.raises(SymParseError) as info:
            parse(text)
        assert info.value.position == pos
    with pytest.raises((SymParseError, ValueError)):
        parse("delta^2")


@given(exprs(with_delta=True))
def test_render_parse_round_trip(e):
    assert parse(render(e)) == e
    assert render(parse(render(e))) == render(e)


@given(raw_terms(with_delta=True), st.randoms())
def test_canonicalization_is_order_independent(items, rnd):
    shuffled = list(items)
    rnd.shuffle(shuffled)
    assert SymExpr.from_raw(items) == SymExpr.from_raw(shuffled)
    e = SymExpr.from_raw(items)
    assert SymExpr(e.mapping) == e
    for k, c in e:
        assert c
        assert k.sgn_flag in (0, 1) and k.delta_flag in (0, 1)
        if k.delta_flag:
            assert k.xi_power == k.abs_power == k.sgn_flag == 0


def test_differentiate_examples():
    assert differentiate(sigma(0)) == sigma(1)
    assert differentiate(parse("abs*sigma^(0)")) == parse("sgn*sigma^(0) + abs*sigma^(1)")
    d = differentiate(parse("sgn*sigma^(0)"))
    assert d == parse("2*delta*sigma^(0) + sgn*sigma^(1)")
    from benjamin_lab.symbolic import annihilate
    assert annihilate(d, Hypotheses({0})) == parse("sgn*sigma^(1)")
    with pytest.raises(DistributionOrderOverflow, match="delta'"):
        differentiate(parse("delta*sigma^(2)"))


@given(exprs(), exprs(), st.integers(-4, 4))
def test_differentiate_is_linear(a, b, c):
    assert differentiate(a.scale(c) + b) == differentiate(a).scale(c) + differentiate(b)


@given(exprs(), raw_terms(with_delta=False))
def test_product_rule(a, items):
    # the second factor carries no sigma so the product stays representable
    b = SymExpr.from_raw([(c, t, x, ab, s, d, -1) for c, t, x, ab, s, d, _ in items])
    lhs = differentiate(a * b)
    rhs = differentiate(a) * b + a * differentiate(b)
    assert lhs == rhs


def _sigma_fn(z):
    return mp.exp(-z * z / 3) * mp.cos(z + mp.mpf(1) / 5)


def _sigma_values(z, n):
    return [mp.diff(_sigma_fn, z, k) for k in range(n)]


@given(exprs(), st.floats(0.2, 3.0), st.booleans(), st.floats(0.1, 2.0))
def test_derivative_matches_numerics(e, x, negative, t):
    with mp.workdps(40):
        z = mp.mpf(-x if negative else x)
        T = mp.mpf(t)
        # delta terms vanish pointwise at xi != 0
        de = SymExpr({k: c for k, c in differentiate(e) if not k.delta_flag})
        exact = evaluate(de, z, T, _sigma_values(z, 5), ctx=mp)
        numeric = mp.diff(lambda s: evaluate(e, s, T, _sigma_values(s, 4), ctx=mp), z)
        scale = max(abs(numeric), mp.mpf(1))
        assert abs(exact - numeric) / scale < 1e-8


@pytest.mark.parametrize("order", [1, 2, 3, 4])
def test_phase_expansion_matches_numerics(order):
    # d^n(mu sigma)/mu at xi != 0, where every delta term vanishes
    e = differentiate_with_phase(order, {0, 1})
    e = SymExpr({k: c for k, c in e if not k.delta_flag})
    with mp.workdps(40):
        for x in (-1.3, -0.4, 0.7, 2.1):
            z, T = mp.mpf(x), mp.mpf("0.6")

            def product(s):
                return mp.expj(T * (s**3 - s * abs(s))) * _sigma_fn(s)

            numeric = mp.diff(product, z, order) / mp.expj(T * (z**3 - z * abs(z)))
            exact = evaluate(e, z, T, _sigma_values(z, order + 1), ctx=mp)
            assert abs(exact - numeric) < 1e-8 * max(abs(numeric), 1)


def test_phase_expansion_examples():
    assert differentiate_with_phase(1) == parse("3*i*t*xi^2*sigma^(0) - 2*i*t*abs*sigma^(0) + sigma^(1)")
    e3 = differentiate_with_phase(3, {0})
    for text in ("6*i*t*sigma^(0)", "9*i*t*xi^2*sigma^(2)", "-6*i*t*abs*sigma^(2)", "sigma^(3)"):
        (k, c), = parse(text)
        assert e3.coefficient(k) == c
    e4 = differentiate_with_phase(4, {0, 1})
    for text in ("81*t^4*xi^8*sigma^(0)", "16*t^4*xi^4*sigma^(0)", "sigma^(4)"):
        (k, c), = parse(text)
        assert e4.coefficient(k) == c


def test_delta_term_sign_without_hypotheses():
    e3 = differentiate_with_phase(3)
    assert e3.coefficient(key(0, delta=1, t=1)) == coeff(0, -4)


def test_hypotheses_are_load_bearing():
    for order in range(5):
        differentiate_with_phase(order, {0, 1})
    differentiate_with_phase(3)
    with pytest.raises(DistributionOrderOverflow):
        differentiate_with_phase(4)
    with pytest.raises(DistributionOrderOverflow):
        differentiate_with_phase(4, {1})


def test_verify_expansion():
    engine = differentiate_with_phase(3, {0})
    assert verify_expansion(3, {0}, engine).verified
    (k, c) = next(iter(engine))
    flipped = SymExpr({**engine.mapping, k: -c})
    diff = verify_expansion(3, {0}, flipped)
    assert len(diff.entries) == 1
    sym = diff.symmetric_difference()
    assert len(sym) == 2 and {s[0] for s in sym} == {"engine", "transcription"}
    assert sym[0][2] == -sym[1][2]
    assert "1 discrepant" in diff.to_text("X")
    assert diff.to_jsonl("X").count("\n") == 1


def test_packaged_transcriptions_and_allowlist():
    trans = load_transcriptions()
    allow = load_allowlist()
    assert set(trans) >= {"DER3", "DER4"}
    for label, tr in trans.items():
        diff = verify_expansion(tr.order, tr.hypotheses, tr.expr)
        unexpected, allowed, stale = compare_with_allowlist(label, diff, allow)
        assert unexpected == [] and stale == []
    der3 = verify_expansion(trans["DER3"].order, trans["DER3"].hypotheses, trans["DER3"].expr)
    delta = [e for e in der3.entries if e.monomial.delta_flag]
    assert [(e.engine_coeff, e.paper_coeff) for e in delta] == [(coeff(0, -4), coeff(0, 4))]


def test_transcription_file_errors():
    with pytest.raises(ValueError):
        parse_transcriptions("sigma^(0)")
    with pytest.raises(ValueError):
        parse_transcriptions("[A order=1]\nsigma^(0)\n[A order=1]\nsigma^(0)")
    with pytest.raises(ValueError):
        parse_transcriptions("[A foo=1]\nsigma^(0)")
    with pytest.raises(SymParseError, match="block A"):
        parse_transcriptions("[A order=1]\nsigma^(0) +")


def test_delta_coefficient_formula():
    G = delta_coefficient_formula()
    assert G(0.0, 1.3, 2.0) == 0.0
    assert G.root_ratio() == -4
    m1, p = -math.sqrt(math.pi), math.sqrt(math.pi / 2)
    root = float(G.root_ratio()) * m1 / p
    assert root == pytest.approx(4 * math.sqrt(2), rel=1e-14)
    assert abs(G(root, m1, p)) < 1e-12
    assert G.mapping == {(1, 1, 0): -12, (2, 0, 1): -3}
    assert G.render() == "-12*t*M1 - 3*t^2*P"
